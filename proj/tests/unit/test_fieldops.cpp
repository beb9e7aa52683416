#include <cmath>
#include <functional>

#include "doctest.h"
#include "qpot/fieldops.hpp"

using namespace qpot;

namespace {

Field sample(const SpaceTimeGrid& g, const std::function<double(double, double)>& f) {
  Field out(g);
  for (int j = 0; j < g.nt; ++j)
    for (int i = 0; i < g.nx; ++i) out.at(j, i) = f(g.x(i), g.t(j));
  return out;
}

double max_err(const Field& got, const std::function<double(double, double)>& exact) {
  double m = 0.0;
  for (int j = 0; j < got.nt(); ++j)
    for (int i = 0; i < got.nx(); ++i)
      m = std::max(m, std::fabs(got.at(j, i) - exact(got.grid.x(i), got.grid.t(j))));
  return m;
}

SpaceTimeGrid xline(double x0, double x1, int nx) {
  return SpaceTimeGrid(x0, x1, nx, 0.0, 0.0, 1);
}

}  // namespace

TEST_SUITE("fieldops") {

TEST_CASE("ddx: exact on quadratics, zero on constants") {
  auto g = xline(0.0, 1.0, 11);
  Field f = sample(g, [](double x, double) { return x * x; });
  CHECK(max_err(ddx(f), [](double x, double) { return 2.0 * x; }) <= 1e-12);

  Field c = sample(g, [](double, double) { return 7.25; });
  CHECK(linf(ddx(c)) <= 1e-13);
}

TEST_CASE("ddx: analytic oracle sin -> cos with second-order refinement") {
  auto err_at = [](int nx) {
    auto g = xline(0.0, M_PI, nx);
    Field f = sample(g, [](double x, double) { return std::sin(x); });
    return max_err(ddx(f), [](double x, double) { return std::cos(x); });
  };
  double e201 = err_at(201), e401 = err_at(401);
  CHECK(e201 <= 1e-3);
  CHECK(e201 / e401 >= 3.5);
  CHECK(e201 / e401 <= 4.5);
}

TEST_CASE("d2dx2: quadratics and linears are exact") {
  auto g = xline(-1.0, 2.0, 13);
  Field f = sample(g, [](double x, double) { return x * x; });
  CHECK(max_err(d2dx2(f), [](double, double) { return 2.0; }) <= 1e-10);

  Field lin = sample(g, [](double x, double) { return 3.0 * x + 2.0; });
  CHECK(linf(d2dx2(lin)) <= 1e-11);
}

TEST_CASE("d2dx2: analytic oracle cos(2x) -> -4cos(2x)") {
  auto err_at = [](int nx) {
    auto g = xline(0.0, M_PI, nx);
    Field f = sample(g, [](double x, double) { return std::cos(2.0 * x); });
    return max_err(d2dx2(f), [](double x, double) { return -4.0 * std::cos(2.0 * x); });
  };
  double e401 = err_at(401);
  CHECK(e401 <= 2e-3);
  CHECK(err_at(201) / e401 >= 3.5);
  CHECK(err_at(201) / e401 <= 4.5);
}

TEST_CASE("ddt: polynomials, statics, and the exponential oracle") {
  SpaceTimeGrid g(0.0, 1.0, 5, 0.0, 1.0, 41);
  Field f = sample(g, [](double, double t) { return t * t; });
  CHECK(max_err(ddt(f), [](double, double t) { return 2.0 * t; }) <= 1e-10);

  Field s = sample(g, [](double x, double) { return std::sin(x); });
  CHECK(linf(ddt(s)) <= 1e-12);

  const double c = 0.5;
  SpaceTimeGrid gfine(0.0, 1.0, 5, 0.0, 1.0, 401);
  Field e = sample(gfine, [&](double x, double t) { return std::exp(2.0 * c * t) * x * x; });
  Field de = ddt(e);
  double rel = 0.0;
  for (int j = 0; j < gfine.nt; ++j)
    for (int i = 1; i < gfine.nx; ++i) {  // skip x=0 where the field vanishes
      double x = gfine.x(i), t = gfine.t(j);
      double exact = 2.0 * c * std::exp(2.0 * c * t) * x * x;
      rel = std::max(rel, std::fabs(de.at(j, i) - exact) / std::fabs(exact));
    }
  CHECK(rel <= 1e-3);

  SpaceTimeGrid g2(0.0, 1.0, 5, 0.0, 1.0, 2);
  Field two(g2, 1.0);
  CHECK_THROWS_AS(ddt(two), GridError);
  SpaceTimeGrid g1(0.0, 1.0, 5, 0.0, 0.0, 1);
  Field one(g1, 1.0);
  CHECK_THROWS_AS(ddt(one), GridError);
  CHECK_THROWS_AS(g1.tau(), GridError);
}

TEST_CASE("cumint_x: antiderivatives with base point") {
  auto g = xline(0.0, 1.0, 101);
  Field one(g, 1.0);
  CHECK(max_err(cumint_x(one, 0.0), [](double x, double) { return x; }) <= 1e-13);

  Field f = sample(g, [](double x, double) { return 2.0 * x; });
  // trapezoid is exact on linear integrands
  CHECK(max_err(cumint_x(f, 0.0), [](double x, double) { return x * x; }) <=
        g.h() * g.h());

  // (a x + b)^2 integrates to the cube formula; trapezoid error is
  // h^2/6 * (b - a) * max|f''| cumulatively
  const double a = 1.5, b = 0.7;
  Field q = sample(g, [&](double x, double) {
    double u = a * x + b;
    return u * u;
  });
  Field F = cumint_x(q, g.x0);
  auto exact = [&](double x, double) {
    double u = a * x + b, u0 = a * g.x0 + b;
    return (u * u * u - u0 * u0 * u0) / (3.0 * a);
  };
  CHECK(max_err(F, exact) <= g.h() * g.h() / 6.0 * 2.0 * a * a * (g.x1 - g.x0) * 1.01);

  CHECK(linf(cumint_x(f, 0.5)) > 0.0);  // base point shifts values
  Field Fm = cumint_x(f, 0.5);
  CHECK(std::fabs(Fm.at(0, 50)) <= 1e-14);  // F(x_ref) = 0 on-node
  CHECK_THROWS_AS(cumint_x(f, -0.1), GridError);
  CHECK_THROWS_AS(cumint_x(f, 1.1), GridError);

  // off-node base point still zeroes the (interpolated) antiderivative there
  Field Fo = cumint_x(one, 0.503);
  CHECK(max_err(Fo, [](double x, double) { return x - 0.503; }) <= 1e-12);
}

TEST_CASE("cumint_t: constants and the cubic oracle") {
  SpaceTimeGrid g(0.0, 1.0, 3, 0.0, 1.0, 401);
  Field one(g, 1.0);
  CHECK(max_err(cumint_t(one), [](double, double t) { return t; }) <= 1e-13);

  Field q0(g, 2.5);
  CHECK(max_err(cumint_t(q0), [](double, double t) { return 2.5 * t; }) <= 1e-12);

  Field f = sample(g, [](double, double t) { return 3.0 * t * t; });
  CHECK(max_err(cumint_t(f), [](double, double t) { return t * t * t; }) <= 1e-5);

  SpaceTimeGrid g1(0.0, 1.0, 3, 0.0, 0.0, 1);
  Field single(g1, 1.0);
  CHECK_THROWS_AS(cumint_t(single), GridError);
}

TEST_CASE("norms: linf and grid-weighted rms") {
  auto g = xline(0.0, 1.0, 2001);
  Field zero(g, 0.0);
  CHECK(linf(zero) == 0.0);
  CHECK(l2(zero) == 0.0);

  Field two(g, 2.0);
  CHECK(linf(two) == 2.0);
  CHECK(l2(two) == doctest::Approx(2.0).epsilon(1e-12));

  Field f = sample(g, [](double x, double) { return x; });
  CHECK(l2(f) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-3));

  Mask m(g, true);
  for (int i = 0; i < g.nx; ++i)
    if (g.x(i) > 0.5) m.set(0, i, false);
  CHECK(linf(f, m) <= 0.5 + 1e-12);
  CHECK(l2(f, m) == doctest::Approx(0.5 / std::sqrt(3.0)).epsilon(1e-2));
}

TEST_CASE("cumint_x then ddx recovers the integrand at second order") {
  auto err_at = [](int nx) {
    auto g = xline(0.0, 2.0, nx);
    Field f = sample(g, [](double x, double) { return std::sin(2.0 * x) + 0.3 * x; });
    Field back = ddx(cumint_x(f, 0.5));
    return max_err(back, [](double x, double) { return std::sin(2.0 * x) + 0.3 * x; });
  };
  double e101 = err_at(101), e201 = err_at(201);
  CHECK(e101 / e201 >= 3.5);
  CHECK(e101 / e201 <= 4.5);
}

TEST_CASE("ddt of cumint_t recovers the integrand on interior slices") {
  SpaceTimeGrid g(0.0, 1.0, 3, 0.0, 2.0, 201);
  Field f = sample(g, [](double, double t) { return std::cos(3.0 * t); });
  Field back = ddt(cumint_t(f));
  double m = 0.0;
  for (int j = 1; j < g.nt - 1; ++j)
    for (int i = 0; i < g.nx; ++i)
      m = std::max(m, std::fabs(back.at(j, i) - f.at(j, i)));
  double tau = g.tau();
  CHECK(m <= 10.0 * tau * tau);
}

TEST_CASE("operations leave their inputs unmodified") {
  SpaceTimeGrid g(0.0, 1.0, 21, 0.0, 1.0, 5);
  Field f = sample(g, [](double x, double t) { return std::sin(x + t); });
  Field copy = f;
  (void)ddx(f);
  (void)d2dx2(f);
  (void)ddt(f);
  (void)cumint_x(f, 0.5);
  (void)cumint_t(f);
  (void)linf(f);
  (void)l2(f);
  CHECK(f.v == copy.v);
}

TEST_CASE("stencil validity masks dilate over the stencil footprint") {
  SpaceTimeGrid g(0.0, 1.0, 9, 0.0, 1.0, 5);
  Mask m(g, true);
  m.set(2, 4, false);

  Mask after_dx = valid_after_ddx(m);
  CHECK(!after_dx.ok(2, 3));
  CHECK(!after_dx.ok(2, 4));
  CHECK(!after_dx.ok(2, 5));
  CHECK(after_dx.ok(2, 6));
  CHECK(after_dx.ok(1, 4));

  Mask after_dt = valid_after_ddt(m);
  CHECK(!after_dt.ok(1, 4));
  CHECK(!after_dt.ok(3, 4));
  CHECK(after_dt.ok(2, 3));
  // one-sided time closures at the edges read deeper into the line
  Mask medge(g, true);
  medge.set(2, 0, false);
  Mask a = valid_after_ddt(medge);
  CHECK(!a.ok(0, 0));  // boundary stencil reaches slice 2
  CHECK(!a.ok(4, 0));

  Mask after_dxx = valid_after_d2dx2(m);
  CHECK(!after_dxx.ok(2, 3));
  CHECK(!after_dxx.ok(2, 5));
  CHECK(after_dxx.ok(2, 6));
  Mask bedge(g, true);
  bedge.set(0, 4, false);
  Mask b = valid_after_d2dx2(bedge);
  CHECK(!b.ok(0, 0));  // five-point boundary closure reaches node 4
  CHECK(!b.ok(0, 5));  // node 5's interior stencil reads node 4 too
  CHECK(b.ok(0, 6));
}

}  // TEST_SUITE
