#include "qpot/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "qpot/parallel.hpp"

namespace qpot {
namespace {

constexpr int kMaxBisectIter = 220;

// Symmetric tridiagonal interior operator: diag d, constant off-diagonal off.
struct TriOp {
  std::vector<double> d;
  double off = 0.0;

  int n() const { return static_cast<int>(d.size()); }

  double gershgorin_lo() const {
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n(); ++i) {
      double r = (i > 0 ? std::fabs(off) : 0.0) + (i < n() - 1 ? std::fabs(off) : 0.0);
      lo = std::min(lo, d[i] - r);
    }
    return lo;
  }
  double gershgorin_hi() const {
    double hi = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n(); ++i) {
      double r = (i > 0 ? std::fabs(off) : 0.0) + (i < n() - 1 ? std::fabs(off) : 0.0);
      hi = std::max(hi, d[i] + r);
    }
    return hi;
  }
  double norm_bound() const { return std::max(std::fabs(gershgorin_lo()), std::fabs(gershgorin_hi())); }
};

TriOp interior_operator(std::span<const double> q, double h, double beta, double mu) {
  int n = static_cast<int>(q.size()) - 2;
  TriOp op;
  op.off = -1.0 / (h * h);
  op.d.resize(n);
  for (int i = 0; i < n; ++i) op.d[i] = 2.0 / (h * h) - beta * q[i + 1] + mu;
  return op;
}

// Number of eigenvalues of op strictly below x (Sturm count via the LDL^T
// pivot recurrence). Degenerate pivots are floored to a tiny negative value
// before counting, which keeps the count monotone when x hits an eigenvalue
// of a leading minor exactly. Extended precision keeps the count reliable at
// the 1e-10 level even when ||T|| is ~1/h^2.
int count_below(const TriOp& op, double x) {
  const long double e2 = static_cast<long double>(op.off) * op.off;
  const long double pivmin =
      std::numeric_limits<double>::min() * std::max<long double>(1.0L, e2);
  int cnt = 0;
  long double piv = 1.0L;
  for (int i = 0; i < op.n(); ++i) {
    long double sub = (i > 0) ? e2 / piv : 0.0L;
    piv = (static_cast<long double>(op.d[i]) - x) - sub;
    if (piv < pivmin && piv > -pivmin) piv = -pivmin;
    if (piv < 0.0L) ++cnt;
  }
  return cnt;
}

// k-th smallest eigenvalue (0-indexed) by bisection on the count function.
double kth_eigenvalue(const TriOp& op, int k) {
  double lo = op.gershgorin_lo();
  double hi = op.gershgorin_hi();
  for (int it = 0; it < kMaxBisectIter; ++it) {
    double mid = 0.5 * (lo + hi);
    double mag = std::max({1.0, std::fabs(lo), std::fabs(hi)});
    if (hi - lo <= std::max(1e-13, 8.0 * std::numeric_limits<double>::epsilon() * mag))
      break;
    if (count_below(op, mid) <= k) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Eigenvalue of op closest to `target`.
double nearest_eigenvalue(const TriOp& op, double target) {
  int c = count_below(op, target);
  double best = std::numeric_limits<double>::infinity();
  double lam = 0.0;
  if (c > 0) {
    double below = kth_eigenvalue(op, c - 1);
    if (std::fabs(below - target) < best) {
      best = std::fabs(below - target);
      lam = below;
    }
  }
  if (c < op.n()) {
    double above = kth_eigenvalue(op, c);
    if (std::fabs(above - target) < best) lam = above;
  }
  return lam;
}

struct NearZeroPivot {};

// Pivot-free Thomas sweep; throws NearZeroPivot on a degenerate pivot so the
// caller can reroute (the operator may still be regular).
std::vector<double> thomas(const TriOp& op, const std::vector<double>& rhs) {
  const int n = op.n();
  const double guard = 1e-14 * std::max(1.0, op.norm_bound());
  std::vector<double> c(n, 0.0), x(n, 0.0);
  double piv = op.d[0];
  if (std::fabs(piv) < guard) throw NearZeroPivot{};
  c[0] = op.off / piv;
  x[0] = rhs[0] / piv;
  for (int i = 1; i < n; ++i) {
    piv = op.d[i] - op.off * c[i - 1];
    if (std::fabs(piv) < guard) throw NearZeroPivot{};
    c[i] = op.off / piv;
    x[i] = (rhs[i] - op.off * x[i - 1]) / piv;
  }
  for (int i = n - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
  return x;
}

// Gaussian elimination with partial pivoting (one fill diagonal), the
// fallback when the pivot-free sweep degenerates on an indefinite slice.
std::vector<double> pivoting_solve(const TriOp& op, const std::vector<double>& rhs) {
  const int n = op.n();
  std::vector<double> a(n, op.off), b(op.d), c(n, op.off), f(n, 0.0), r(rhs);
  a[0] = 0.0;
  c[n - 1] = 0.0;
  for (int i = 0; i < n - 1; ++i) {
    if (std::fabs(a[i + 1]) > std::fabs(b[i])) {
      std::swap(b[i], a[i + 1]);
      std::swap(c[i], b[i + 1]);
      std::swap(f[i], c[i + 1]);
      std::swap(r[i], r[i + 1]);
    }
    if (b[i] == 0.0) throw SolverError("tridiagonal solve: exactly singular pivot");
    double w = a[i + 1] / b[i];
    b[i + 1] -= w * c[i];
    c[i + 1] -= w * f[i];
    r[i + 1] -= w * r[i];
  }
  if (b[n - 1] == 0.0) throw SolverError("tridiagonal solve: exactly singular pivot");
  std::vector<double> x(n, 0.0);
  x[n - 1] = r[n - 1] / b[n - 1];
  if (n >= 2) x[n - 2] = (r[n - 2] - c[n - 2] * x[n - 1]) / b[n - 2];
  for (int i = n - 3; i >= 0; --i)
    x[i] = (r[i] - c[i] * x[i + 1] - f[i] * x[i + 2]) / b[i];
  return x;
}

void residual(const TriOp& op, const std::vector<double>& x, const std::vector<double>& rhs,
              std::vector<double>& r) {
  const int n = op.n();
  for (int i = 0; i < n; ++i) {
    double ax = op.d[i] * x[i];
    if (i > 0) ax += op.off * x[i - 1];
    if (i < n - 1) ax += op.off * x[i + 1];
    r[i] = rhs[i] - ax;
  }
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::fabs(a));
  return m;
}

// Direct solve with iterative refinement. Refinement is driven down to the
// rounding floor (not just an accuracy threshold): quantities derived from
// the solution divide by 1/h^2-scale second differences, so leftover
// residual shows up amplified downstream.
std::vector<double> refined_solve(const TriOp& op, const std::vector<double>& rhs) {
  const double scale_op = op.norm_bound();
  const double eps = std::numeric_limits<double>::epsilon();
  auto system_scale = [&](const std::vector<double>& x) {
    return std::max(scale_op * max_abs(x), max_abs(rhs));
  };

  auto refine = [&](auto&& solver) {
    std::vector<double> x = solver(op, rhs);
    std::vector<double> r(op.n());
    residual(op, x, rhs, r);
    double rnorm = max_abs(r);
    for (int pass = 0; pass < 4; ++pass) {
      if (rnorm <= 8.0 * eps * system_scale(x)) break;
      std::vector<double> dx = solver(op, r);
      std::vector<double> x2 = x;
      for (int i = 0; i < op.n(); ++i) x2[i] += dx[i];
      std::vector<double> r2(op.n());
      residual(op, x2, rhs, r2);
      double rnorm2 = max_abs(r2);
      if (rnorm2 >= rnorm) break;
      x.swap(x2);
      rnorm = rnorm2;
    }
    return std::make_pair(std::move(x), rnorm);
  };

  auto thomas_solver = [](const TriOp& o, const std::vector<double>& b) {
    return thomas(o, b);
  };
  auto pivot_solver = [](const TriOp& o, const std::vector<double>& b) {
    return pivoting_solve(o, b);
  };

  std::vector<double> x;
  double rnorm;
  bool used_pivoting = false;
  try {
    std::tie(x, rnorm) = refine(thomas_solver);
  } catch (const NearZeroPivot&) {
    std::tie(x, rnorm) = refine(pivot_solver);
    used_pivoting = true;
  }
  if (rnorm > 1e-12 * system_scale(x) && !used_pivoting) {
    std::tie(x, rnorm) = refine(pivot_solver);
  }
  if (rnorm > 1e-12 * std::max(system_scale(x), 1e-300))
    throw SolverError("tridiagonal solve: residual did not reach rounding level");
  return x;
}

}  // namespace

void EllipticProblem::validate() const {
  if (nx < 3) throw GridError("elliptic: slice needs at least 3 nodes");
  if (!(h > 0.0)) throw GridError("elliptic: spacing must be positive");
  if (static_cast<int>(q.size()) != nx) throw GridError("elliptic: q size mismatch");
  if (!g.empty() && static_cast<int>(g.size()) != nx)
    throw GridError("elliptic: source size mismatch");
  if (!(beta > 0.0)) throw Error("elliptic: beta must be positive");
  if (!std::isfinite(r_left) || !std::isfinite(r_right))
    throw Error("elliptic: boundary values must be finite");
  for (double a : q)
    if (!std::isfinite(a)) throw Error("elliptic: Q contains non-finite values");
}

double laplacian_lambda1(int nx, double h) {
  // Interior Dirichlet Laplacian on n = nx-2 nodes: lambda_k =
  // (4/h^2) sin^2(k*pi*h / (2L)) with L = (nx-1)h.
  double L = (nx - 1) * h;
  double s = std::sin(M_PI * h / (2.0 * L));
  return 4.0 / (h * h) * s * s;
}

std::pair<bool, double> coercivity_check(std::span<const double> q, double h, double beta,
                                         double mu) {
  if (q.size() < 3) throw GridError("coercivity_check: slice needs at least 3 nodes");
  double sup_q = -std::numeric_limits<double>::infinity();
  for (double a : q) sup_q = std::max(sup_q, a);
  double margin = mu + laplacian_lambda1(static_cast<int>(q.size()), h) - beta * sup_q;
  return {margin > 0.0, margin};
}

double nearest_sigma_eigenvalue(std::span<const double> q, double h, double beta, double mu) {
  if (q.size() < 3) throw GridError("nearest_sigma_eigenvalue: slice needs at least 3 nodes");
  TriOp op = interior_operator(q, h, beta, mu);
  return nearest_eigenvalue(op, 0.0);
}

double operator_norm_bound(std::span<const double> q, double h, double beta, double mu) {
  if (q.size() < 3) throw GridError("operator_norm_bound: slice needs at least 3 nodes");
  return interior_operator(q, h, beta, mu).norm_bound();
}

std::vector<double> sigma_spectrum(std::span<const double> q, double h, double beta,
                                   int n_eigs) {
  if (q.size() < 3) throw GridError("sigma_spectrum: slice needs at least 3 nodes");
  int n = static_cast<int>(q.size()) - 2;
  if (n_eigs < 1 || n_eigs > n)
    throw Error("sigma_spectrum: n_eigs must be in [1, nx-2]");
  TriOp op = interior_operator(q, h, beta, 0.0);
  std::vector<double> lams(n_eigs);
  for (int k = 0; k < n_eigs; ++k) lams[k] = kth_eigenvalue(op, k);
  return lams;
}

SolveReport diagnose_slice(std::span<const double> q, double h, double beta, double mu) {
  if (q.size() < 3) throw GridError("diagnose_slice: slice needs at least 3 nodes");
  TriOp op = interior_operator(q, h, beta, mu);
  SolveReport rep;
  auto [coercive, margin] = coercivity_check(q, h, beta, mu);
  rep.coercive = coercive;
  rep.coercivity_margin = margin;
  rep.sigma_distance = std::fabs(nearest_eigenvalue(op, 0.0));
  double lam_lo = kth_eigenvalue(op, 0);
  double lam_hi = kth_eigenvalue(op, op.n() - 1);
  rep.condition_estimate =
      std::max(std::fabs(lam_lo), std::fabs(lam_hi)) /
      std::max(rep.sigma_distance, std::numeric_limits<double>::min());
  return rep;
}

std::vector<double> sigma_eigenvector(std::span<const double> q, double h, double beta,
                                      double lambda) {
  if (q.size() < 3) throw GridError("sigma_eigenvector: slice needs at least 3 nodes");
  TriOp op = interior_operator(q, h, beta, -lambda);  // T - lambda I
  const int n = op.n();

  auto solve_any = [&](const std::vector<double>& b) {
    try {
      return thomas(op, b);
    } catch (const NearZeroPivot&) {
      return pivoting_solve(op, b);
    }
  };

  // deterministic start with broad support, no accidental orthogonality
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = 1.0 + 0.3 * std::sin(2.399963 * (i + 1));
  double norm = max_abs(u);
  for (auto& v : u) v /= norm;

  for (int pass = 0; pass < 8; ++pass) {
    std::vector<double> w = solve_any(u);
    double m = max_abs(w);
    if (!(m > 0.0) || !std::isfinite(m))
      throw SolverError("sigma_eigenvector: inverse iteration broke down");
    for (auto& v : w) v /= m;
    double dot = 0.0;
    for (int i = 0; i < n; ++i) dot += w[i] * u[i];
    if (dot < 0.0)
      for (auto& v : w) v = -v;
    double diff = 0.0;
    for (int i = 0; i < n; ++i) diff = std::max(diff, std::fabs(w[i] - u[i]));
    u.swap(w);
    if (diff <= 1e-13) break;
  }

  std::vector<double> r(n);
  residual(op, u, std::vector<double>(n, 0.0), r);
  if (max_abs(r) > 1e-8 * op.norm_bound())
    throw SolverError("sigma_eigenvector: iteration did not converge to a kernel mode");

  std::vector<double> full(q.size(), 0.0);
  std::copy(u.begin(), u.end(), full.begin() + 1);
  return full;
}

std::pair<std::vector<double>, SolveReport> solve_slice(const EllipticProblem& p) {
  p.validate();
  TriOp op = interior_operator(p.q, p.h, p.beta, p.mu);
  const int n = op.n();

  SolveReport rep = diagnose_slice(p.q, p.h, p.beta, p.mu);

  double tol = std::max(1e-10, p.sigma_tol_rel * op.norm_bound());
  if (rep.sigma_distance <= tol) {
    double lam_nearest = nearest_eigenvalue(op, 0.0);
    std::ostringstream msg;
    msg << "elliptic slice is singular: eigenvalue " << lam_nearest
        << " of the shifted operator lies within tolerance " << tol
        << " of zero; no unique solution";
    throw SingularSystemError(msg.str(), lam_nearest);
  }

  std::vector<double> rhs(n, 0.0);
  if (!p.g.empty())
    for (int i = 0; i < n; ++i) rhs[i] = p.g[i + 1];
  rhs[0] += p.r_left / (p.h * p.h);
  rhs[n - 1] += p.r_right / (p.h * p.h);

  std::vector<double> interior = refined_solve(op, rhs);

  std::vector<double> R(p.nx);
  R[0] = p.r_left;
  R[p.nx - 1] = p.r_right;
  std::copy(interior.begin(), interior.end(), R.begin() + 1);
  return {std::move(R), rep};
}

std::pair<Field, std::vector<SolveReport>> solve_all_slices(
    const Field& Q, const PhysParams& params, double mu, std::span<const double> bc_left,
    std::span<const double> bc_right, const Field* g_rhs, double sigma_tol_rel) {
  const auto& grid = Q.grid;
  if (static_cast<int>(bc_left.size()) != grid.nt ||
      static_cast<int>(bc_right.size()) != grid.nt)
    throw GridError("solve_all_slices: boundary data must have one value per slice");
  if (g_rhs) require_same_grid(Q, *g_rhs, "solve_all_slices");

  Field R(grid);
  std::vector<SolveReport> reports(grid.nt);
  std::vector<SingularSystemError::SliceFailure> failures;
  std::mutex failures_mutex;

  parallel_for(grid.nt, [&](int j) {
    EllipticProblem p;
    p.nx = grid.nx;
    p.h = grid.h();
    p.q.assign(Q.v.begin() + std::size_t(j) * grid.nx,
               Q.v.begin() + std::size_t(j + 1) * grid.nx);
    p.beta = params.beta();
    p.mu = mu;
    p.r_left = bc_left[j];
    p.r_right = bc_right[j];
    p.sigma_tol_rel = sigma_tol_rel;
    if (g_rhs)
      p.g.assign(g_rhs->v.begin() + std::size_t(j) * grid.nx,
                 g_rhs->v.begin() + std::size_t(j + 1) * grid.nx);
    try {
      auto [slice, rep] = solve_slice(p);
      std::copy(slice.begin(), slice.end(), R.v.begin() + std::size_t(j) * grid.nx);
      reports[j] = rep;
    } catch (const SingularSystemError& e) {
      std::lock_guard<std::mutex> lock(failures_mutex);
      failures.push_back({j, e.failures.front().lambda});
    }
  });

  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end(),
              [](const auto& a, const auto& b) { return a.slice < b.slice; });
    std::ostringstream msg;
    msg << failures.size() << " of " << grid.nt
        << " slices singular (no unique solution); slices:";
    for (std::size_t k = 0; k < failures.size() && k < 8; ++k)
      msg << " " << failures[k].slice << " (eigenvalue " << failures[k].lambda << ")";
    if (failures.size() > 8) msg << " ...";
    throw SingularSystemError(msg.str(), std::move(failures));
  }
  return {std::move(R), std::move(reports)};
}

}  // namespace qpot
