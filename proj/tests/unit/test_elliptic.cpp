#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "qpot/elliptic.hpp"

using namespace qpot;

namespace {

EllipticProblem make_problem(int nx, double x0, double x1,
                             const std::function<double(double)>& qfn, double beta,
                             double rl, double rr, double mu = 0.0) {
  EllipticProblem p;
  p.nx = nx;
  p.h = (x1 - x0) / (nx - 1);
  p.q.resize(nx);
  for (int i = 0; i < nx; ++i) p.q[i] = qfn(x0 + i * p.h);
  p.beta = beta;
  p.mu = mu;
  p.r_left = rl;
  p.r_right = rr;
  return p;
}

// Independent check that the returned slice satisfies the discrete equation.
double relative_residual(const EllipticProblem& p, const std::vector<double>& R) {
  double h2 = p.h * p.h;
  double worst = 0.0, scale = 0.0;
  for (int i = 1; i < p.nx - 1; ++i) {
    double lhs = (-R[i - 1] + 2.0 * R[i] - R[i + 1]) / h2 - p.beta * p.q[i] * R[i] +
                 p.mu * R[i];
    double rhs = p.g.empty() ? 0.0 : p.g[i];
    worst = std::max(worst, std::fabs(lhs - rhs));
    scale = std::max(scale, std::fabs(R[i]));
  }
  double opnorm = 4.0 / h2 + p.beta * 10.0 + std::fabs(p.mu);
  return worst / std::max(opnorm * scale, 1e-300);
}

}  // namespace

TEST_SUITE("elliptic") {

TEST_CASE("solve_slice: linear solutions of R''=0 are reproduced exactly") {
  const double a = 1.3, b = 0.4;
  auto p = make_problem(101, 0.0, 1.0, [](double) { return 0.0; }, 2.0, b, a + b);
  auto [R, rep] = solve_slice(p);
  for (int i = 0; i < p.nx; ++i) {
    double x = i * p.h;
    CHECK(R[i] == doctest::Approx(a * x + b).epsilon(1e-12));
  }
  CHECK(rep.coercive);
  CHECK(relative_residual(p, R) <= 1e-12);
}

TEST_CASE("solve_slice: coercive homogeneous problem has only the trivial solution") {
  auto p = make_problem(201, 0.0, 1.0, [](double) { return -1.5; }, 2.0, 0.0, 0.0);
  auto [R, rep] = solve_slice(p);
  CHECK(rep.coercive);
  for (double v : R) CHECK(std::fabs(v) <= 1e-14);
}

TEST_CASE("solve_slice: first Dirichlet eigenvalue makes the operator singular") {
  const double L = 1.0, beta = 2.0;
  const double k2 = (M_PI / L) * (M_PI / L);
  auto p = make_problem(1001, 0.0, L, [&](double) { return k2 / beta; }, beta, 0.0, 0.0);
  CHECK_THROWS_AS(solve_slice(p), SingularSystemError);
  try {
    solve_slice(p);
  } catch (const SingularSystemError& e) {
    REQUIRE(e.failures.size() == 1);
    // the offending eigenvalue is the O(h^2) gap between the discrete and
    // analytic first eigenvalues
    CHECK(std::fabs(e.failures[0].lambda) <= 1e-3);
    CHECK(std::string(e.what()).find("eigenvalue") != std::string::npos);
  }
}

TEST_CASE("solve_slice: general Dirichlet data with a source term") {
  // manufactured: R* = sin(pi x) + 0.5 x on [0,1]
  auto rstar = [](double x) { return std::sin(M_PI * x) + 0.5 * x; };
  auto rstar_xx = [](double x) { return -M_PI * M_PI * std::sin(M_PI * x); };
  auto qfn = [](double x) { return 0.7 * std::sin(3.0 * x) - 0.4; };
  const double beta = 2.0;

  auto p = make_problem(401, 0.0, 1.0, qfn, beta, rstar(0.0), rstar(1.0));
  p.g.resize(p.nx);
  for (int i = 0; i < p.nx; ++i) {
    double x = i * p.h;
    p.g[i] = -rstar_xx(x) - beta * qfn(x) * rstar(x);
  }
  auto [R, rep] = solve_slice(p);
  double err = 0.0;
  for (int i = 0; i < p.nx; ++i) err = std::max(err, std::fabs(R[i] - rstar(i * p.h)));
  CHECK(err <= 1e-4);
  CHECK(relative_residual(p, R) <= 1e-12);
}

TEST_CASE("manufactured solution converges at second order") {
  auto qfn = [](double x) { return 1.2 * std::exp(-std::pow((x - 0.4) / 0.2, 2)); };
  auto rstar = [](double x) { return std::sin(M_PI * x); };
  const double beta = 2.0;
  auto err_at = [&](int nx) {
    auto p = make_problem(nx, 0.0, 1.0, qfn, beta, 0.0, 0.0);
    p.g.resize(nx);
    for (int i = 0; i < nx; ++i) {
      double x = i * p.h;
      p.g[i] = M_PI * M_PI * std::sin(M_PI * x) - beta * qfn(x) * rstar(x);
    }
    auto [R, rep] = solve_slice(p);
    double err = 0.0;
    for (int i = 0; i < nx; ++i) err = std::max(err, std::fabs(R[i] - rstar(i * p.h)));
    return err;
  };
  double e101 = err_at(101), e201 = err_at(201), e401 = err_at(401);
  CHECK(e101 / e201 >= 3.5);
  CHECK(e101 / e201 <= 4.5);
  CHECK(e201 / e401 >= 3.5);
  CHECK(e201 / e401 <= 4.5);
}

TEST_CASE("solve_all_slices: both linear branches reproduce the closed forms") {
  const double c = 0.5;
  SpaceTimeGrid g(0.5, 1.5, 101, 0.0, 1.0, 21);
  PhysParams params(1.0, 1.0);
  Field Q(g, 0.0);

  std::vector<double> bl(g.nt), br(g.nt);
  // a = 0, b = exp(ct): R = exp(ct)
  for (int j = 0; j < g.nt; ++j) bl[j] = br[j] = std::exp(c * g.t(j));
  auto [Ra, reps_a] = solve_all_slices(Q, params, 0.0, bl, br);
  double err = 0.0;
  for (int j = 0; j < g.nt; ++j)
    for (int i = 0; i < g.nx; ++i)
      err = std::max(err, std::fabs(Ra.at(j, i) - std::exp(c * g.t(j))));
  CHECK(err <= 1e-12);
  CHECK(static_cast<int>(reps_a.size()) == g.nt);

  // b = 0, a = exp(ct): R = exp(ct) x
  for (int j = 0; j < g.nt; ++j) {
    bl[j] = std::exp(c * g.t(j)) * g.x0;
    br[j] = std::exp(c * g.t(j)) * g.x1;
  }
  auto [Rb, reps_b] = solve_all_slices(Q, params, 0.0, bl, br);
  err = 0.0;
  for (int j = 0; j < g.nt; ++j)
    for (int i = 0; i < g.nx; ++i)
      err = std::max(err, std::fabs(Rb.at(j, i) - std::exp(c * g.t(j)) * g.x(i)));
  CHECK(err <= 1e-11);
}

TEST_CASE("solve_all_slices: cosine amplitude converges at second order") {
  const double k = 1.0;
  PhysParams params(1.0, 1.0);
  const double E = params.hbar * params.hbar * k * k / (2.0 * params.m);
  auto err_at = [&](int nx) {
    SpaceTimeGrid g(-1.0, 1.0, nx, 0.0, 0.1, 3);
    Field Q(g, E);
    std::vector<double> bl(g.nt, std::sqrt(2.0) * std::cos(k * g.x0));
    std::vector<double> br(g.nt, std::sqrt(2.0) * std::cos(k * g.x1));
    auto [R, reps] = solve_all_slices(Q, params, 0.0, bl, br);
    double err = 0.0;
    for (int i = 0; i < g.nx; ++i)
      err = std::max(err, std::fabs(R.at(0, i) - std::sqrt(2.0) * std::cos(k * g.x(i))));
    return err;
  };
  double e101 = err_at(101), e201 = err_at(201);
  CHECK(e101 <= 1e-4);
  CHECK(e101 / e201 >= 3.5);
  CHECK(e101 / e201 <= 4.5);
}

TEST_CASE("solve_all_slices aggregates singular slices with indices") {
  SpaceTimeGrid g(0.0, 1.0, 501, 0.0, 1.0, 3);
  PhysParams params(1.0, 1.0);  // beta = 2
  const double k2 = M_PI * M_PI;
  Field Q(g, 0.0);
  // poison slice 1 only
  for (int i = 0; i < g.nx; ++i) Q.at(1, i) = k2 / params.beta();
  std::vector<double> bc(g.nt, 0.0);
  try {
    solve_all_slices(Q, params, 0.0, bc, bc);
    CHECK(false);
  } catch (const SingularSystemError& e) {
    REQUIRE(e.failures.size() == 1);
    CHECK(e.failures[0].slice == 1);
  }
}

TEST_CASE("sigma_spectrum: Dirichlet Laplacian eigenvalues match (n pi)^2") {
  std::vector<double> q(1001, 0.0);
  double h = 1.0 / 1000.0;
  auto lams = sigma_spectrum(q, h, 2.0, 5);
  REQUIRE(lams.size() == 5);
  for (int n = 1; n <= 5; ++n) {
    double exact = n * M_PI * n * M_PI;
    CHECK(std::fabs(lams[n - 1] - exact) / exact <= 0.005);
  }
  for (int n = 1; n < 5; ++n) CHECK(lams[n] > lams[n - 1]);
}

TEST_CASE("sigma_spectrum: large negative Q pushes the spectrum up") {
  const double qval = -50.0, beta = 2.0;
  std::vector<double> q(201, qval);
  double h = 1.0 / 200.0;
  auto lams = sigma_spectrum(q, h, beta, 3);
  double lam1 = laplacian_lambda1(201, h);
  for (double lam : lams) CHECK(lam >= beta * std::fabs(qval) + lam1 - 1e-9);
}

TEST_CASE("sigma_spectrum: diagonal shift identity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double beta = 2.0, s = 3.7, h = 1.0 / 150.0;
  std::vector<double> q(151), qs(151);
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = u(rng);
    qs[i] = q[i] + s / beta;
  }
  auto a = sigma_spectrum(q, h, beta, 5);
  auto b = sigma_spectrum(qs, h, beta, 5);
  for (int k = 0; k < 5; ++k) CHECK(std::fabs(b[k] - (a[k] - s)) <= 1e-10);
}

TEST_CASE("sigma_spectrum: eigenvalue monotonicity under pointwise Q-ordering") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.8, 0.8), bump(0.0, 1.5);
  const double beta = 2.0, h = 1.0 / 120.0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> q1(121), q2(121);
    for (std::size_t i = 0; i < q1.size(); ++i) {
      q1[i] = u(rng);
      q2[i] = q1[i] + bump(rng);  // q2 >= q1 pointwise
    }
    auto l1 = sigma_spectrum(q1, h, beta, 4);
    auto l2 = sigma_spectrum(q2, h, beta, 4);
    for (int k = 0; k < 4; ++k) CHECK(l1[k] >= l2[k] - 1e-9);
  }
}

TEST_CASE("coercivity_check covers the paper's sign cases") {
  const double beta = 2.0, h = 1.0 / 100.0;
  std::vector<double> qneg(101);
  for (int i = 0; i <= 100; ++i) qneg[i] = -2.0 - std::sin(3.0 * i * h);
  auto [c1, m1] = coercivity_check(qneg, h, beta, 0.0);
  CHECK(c1);  // Q <= 0 with mu = 0 is always coercive
  CHECK(m1 >= laplacian_lambda1(101, h) - 1e-9);

  std::vector<double> qzero(101, 0.0);
  auto [c2, m2] = coercivity_check(qzero, h, beta, 0.0);
  CHECK(c2);
  CHECK(m2 == doctest::Approx(M_PI * M_PI).epsilon(1e-3));  // lambda_1 ~ pi^2/L^2

  // beta*Q = 2 pi^2/L^2: the sufficient condition fails although the
  // operator is regular (0 is not an eigenvalue)
  std::vector<double> qpos(101, 2.0 * M_PI * M_PI / beta);
  auto [c3, m3] = coercivity_check(qpos, h, beta, 0.0);
  CHECK(!c3);
  CHECK(m3 < 0.0);
  CHECK(std::fabs(nearest_sigma_eigenvalue(qpos, h, beta)) > 1.0);

  // a positive mu shift restores the sufficient condition
  auto [c4, m4] = coercivity_check(qpos, h, beta, 2.0 * M_PI * M_PI);
  CHECK(c4);
}

TEST_CASE("coercive slices always solve") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-2.0, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    EllipticProblem p = make_problem(
        101, 0.0, 1.0, [&](double) { return u(rng); }, 2.0, 0.7, -0.3);
    auto [coercive, margin] = coercivity_check(p.q, p.h, p.beta, p.mu);
    if (!coercive) continue;
    CHECK_NOTHROW(solve_slice(p));
  }
}

TEST_CASE("solve_slice honors the mu shift") {
  // -R'' + mu R = 0 with R(0)=1, R(1)=cosh(w)/..., solution a combination of
  // exp(+-w x); check against the exact two-point solution
  const double mu = 9.0, w = 3.0;
  auto p = make_problem(401, 0.0, 1.0, [](double) { return 0.0; }, 2.0,
                        1.0, std::cosh(w), mu);
  auto [R, rep] = solve_slice(p);
  // exact solution with these boundary values is cosh(w x)
  double err = 0.0;
  for (int i = 0; i < p.nx; ++i)
    err = std::max(err, std::fabs(R[i] - std::cosh(w * i * p.h)));
  CHECK(err <= 2e-4);
  CHECK(rep.coercive);
  CHECK(rep.sigma_distance >= mu);
}

}  // TEST_SUITE
