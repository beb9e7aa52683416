#include "qpot/fieldops.hpp"

#include <cmath>
#include <complex>
#include <cstddef>

namespace qpot {
namespace {

// All stencils are written as combinations of node DIFFERENCES, so constant
// lines (and slices that repeat bit-identically) differentiate to exact
// floating-point zeros.

// First derivative along one line of n values with stride `s`.
// Interior: (f[i+1]-f[i-1])/2h, error +h^2 f'''/6.
// Boundary (n >= 4): (-4f0+7f1-4f2+f3)/2h, one-sided and second order with
// the same +h^2 f'''/6 error constant as the interior stencil.
template <typename T>
void deriv1_line(const T* f, std::ptrdiff_t s, int n, double h, T* out, std::ptrdiff_t os) {
  const double inv2h = 1.0 / (2.0 * h);
  if (n >= 4) {
    out[0] = (-4.0 * (f[0] - f[s]) + 3.0 * (f[s] - f[2 * s]) - (f[2 * s] - f[3 * s])) *
             inv2h;
    out[(n - 1) * os] = (4.0 * (f[(n - 1) * s] - f[(n - 2) * s]) -
                         3.0 * (f[(n - 2) * s] - f[(n - 3) * s]) +
                         (f[(n - 3) * s] - f[(n - 4) * s])) *
                        inv2h;
  } else {  // n == 3: classic second-order one-sided
    out[0] = (-3.0 * (f[0] - f[s]) + (f[s] - f[2 * s])) * inv2h;
    out[2 * os] = (3.0 * (f[2 * s] - f[s]) - (f[s] - f[0])) * inv2h;
  }
  for (int i = 1; i < n - 1; ++i) out[i * os] = (f[(i + 1) * s] - f[(i - 1) * s]) * inv2h;
}

// Second derivative along one line.
// Interior: (f[i-1]-2f[i]+f[i+1])/h^2, error +h^2 f''''/12.
// Boundary (n >= 5): (3f0-9f1+10f2-5f3+f4)/h^2, one-sided, cubic-exact, with
// the same +h^2 f''''/12 error constant as the interior stencil.
template <typename T>
void deriv2_line(const T* f, std::ptrdiff_t s, int n, double h, T* out, std::ptrdiff_t os) {
  const double invh2 = 1.0 / (h * h);
  if (n >= 5) {
    out[0] = (3.0 * (f[0] - f[s]) - 6.0 * (f[s] - f[2 * s]) + 4.0 * (f[2 * s] - f[3 * s]) -
              (f[3 * s] - f[4 * s])) *
             invh2;
    out[(n - 1) * os] = (3.0 * (f[(n - 1) * s] - f[(n - 2) * s]) -
                         6.0 * (f[(n - 2) * s] - f[(n - 3) * s]) +
                         4.0 * (f[(n - 3) * s] - f[(n - 4) * s]) -
                         (f[(n - 4) * s] - f[(n - 5) * s])) *
                        invh2;
  } else if (n == 4) {
    out[0] =
        (2.0 * (f[0] - f[s]) - 3.0 * (f[s] - f[2 * s]) + (f[2 * s] - f[3 * s])) * invh2;
    out[3 * os] = (2.0 * (f[3 * s] - f[2 * s]) - 3.0 * (f[2 * s] - f[s]) + (f[s] - f[0])) *
                  invh2;
  } else {  // n == 3: exact for quadratics
    out[0] = ((f[0] - f[s]) + (f[2 * s] - f[s])) * invh2;
    out[2 * os] = out[0];
  }
  for (int i = 1; i < n - 1; ++i)
    out[i * os] = ((f[(i - 1) * s] - f[i * s]) + (f[(i + 1) * s] - f[i * s])) * invh2;
}

template <typename FieldT>
FieldT ddx_impl(const FieldT& f) {
  if (f.nx() < 3) throw GridError("ddx: needs at least 3 space nodes");
  FieldT out(f.grid);
  const double h = f.grid.h();
  for (int j = 0; j < f.nt(); ++j)
    deriv1_line(&f.v[std::size_t(j) * f.nx()], 1, f.nx(), h, &out.v[std::size_t(j) * f.nx()], 1);
  return out;
}

template <typename FieldT>
FieldT d2dx2_impl(const FieldT& f) {
  if (f.nx() < 3) throw GridError("d2dx2: needs at least 3 space nodes");
  FieldT out(f.grid);
  const double h = f.grid.h();
  for (int j = 0; j < f.nt(); ++j)
    deriv2_line(&f.v[std::size_t(j) * f.nx()], 1, f.nx(), h, &out.v[std::size_t(j) * f.nx()], 1);
  return out;
}

template <typename FieldT>
FieldT ddt_impl(const FieldT& f) {
  if (f.nt() < 3) throw GridError("ddt: needs at least 3 time slices");
  FieldT out(f.grid);
  const double tau = f.grid.tau();
  const std::ptrdiff_t s = f.nx();
  for (int i = 0; i < f.nx(); ++i) deriv1_line(&f.v[i], s, f.nt(), tau, &out.v[i], s);
  return out;
}

Mask valid_after_line(const Mask& m, bool along_x,
                      std::pair<int, int> (*reach)(int, int)) {
  Mask out = m;
  const int n = along_x ? m.nx : m.nt;
  const int other = along_x ? m.nt : m.nx;
  for (int k = 0; k < other; ++k) {
    for (int i = 0; i < n; ++i) {
      auto [lo, hi] = reach(i, n);
      bool ok = true;
      for (int q = lo; q <= hi && ok; ++q)
        ok = along_x ? m.ok(k, q) : m.ok(q, k);
      if (!ok) {
        if (along_x) out.set(k, i, false);
        else out.set(i, k, false);
      }
    }
  }
  return out;
}

}  // namespace

namespace detail {

std::pair<int, int> d1_reach(int i, int n) {
  if (n >= 4) {
    if (i == 0) return {0, 3};
    if (i == n - 1) return {n - 4, n - 1};
  } else {
    return {0, n - 1};
  }
  return {i - 1, i + 1};
}

std::pair<int, int> d2_reach(int i, int n) {
  if (n >= 5) {
    if (i == 0) return {0, 4};
    if (i == n - 1) return {n - 5, n - 1};
    return {i - 1, i + 1};
  }
  return {0, n - 1};
}

}  // namespace detail

Field ddx(const Field& f) { return ddx_impl(f); }
Field d2dx2(const Field& f) { return d2dx2_impl(f); }
Field ddt(const Field& f) { return ddt_impl(f); }
ComplexField ddt(const ComplexField& f) { return ddt_impl(f); }
ComplexField d2dx2(const ComplexField& f) { return d2dx2_impl(f); }

Field cumint_x(const Field& f, double x_ref) {
  const auto& g = f.grid;
  if (x_ref < g.x0 - 1e-12 * g.h() || x_ref > g.x1 + 1e-12 * g.h())
    throw GridError("cumint_x: x_ref outside the domain");
  const double h = g.h();

  // Base-point offset: integral from x0 to x_ref, with a linearly
  // interpolated partial cell when x_ref is off-node.
  double sref = (x_ref - g.x0) / h;
  int iref = static_cast<int>(std::floor(sref));
  if (iref > g.nx - 2) iref = g.nx - 2;
  if (iref < 0) iref = 0;
  double frac = sref - iref;

  Field out(g);
  for (int j = 0; j < g.nt; ++j) {
    double acc = 0.0;
    out.at(j, 0) = 0.0;
    for (int i = 1; i < g.nx; ++i) {
      acc += 0.5 * h * (f.at(j, i - 1) + f.at(j, i));
      out.at(j, i) = acc;
    }
    double base = out.at(j, iref);
    if (frac > 0.0) {
      double f_at_ref = (1.0 - frac) * f.at(j, iref) + frac * f.at(j, iref + 1);
      base += 0.5 * (frac * h) * (f.at(j, iref) + f_at_ref);
    }
    for (int i = 0; i < g.nx; ++i) out.at(j, i) -= base;
  }
  return out;
}

Field cumint_t(const Field& f) {
  const auto& g = f.grid;
  if (g.nt < 2) throw GridError("cumint_t: needs at least 2 time slices");
  const double tau = g.tau();
  Field out(g);
  for (int i = 0; i < g.nx; ++i) out.at(0, i) = 0.0;
  for (int j = 1; j < g.nt; ++j)
    for (int i = 0; i < g.nx; ++i)
      out.at(j, i) = out.at(j - 1, i) + 0.5 * tau * (f.at(j - 1, i) + f.at(j, i));
  return out;
}

double linf(const Field& f) {
  double m = 0.0;
  for (double a : f.v) m = std::max(m, std::fabs(a));
  return m;
}

double linf(const Field& f, const Mask& mask) {
  double m = 0.0;
  for (std::size_t k = 0; k < f.v.size(); ++k)
    if (mask.keep[k]) m = std::max(m, std::fabs(f.v[k]));
  return m;
}

namespace {

double weighted_rms(const Field& f, const Mask* mask) {
  const auto& g = f.grid;
  double num = 0.0, den = 0.0;
  for (int j = 0; j < g.nt; ++j) {
    double wt = (g.nt == 1) ? 1.0 : ((j == 0 || j == g.nt - 1) ? 0.5 : 1.0);
    for (int i = 0; i < g.nx; ++i) {
      if (mask && !mask->ok(j, i)) continue;
      double wx = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
      double w = wt * wx;
      num += w * f.at(j, i) * f.at(j, i);
      den += w;
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

}  // namespace

double l2(const Field& f) { return weighted_rms(f, nullptr); }
double l2(const Field& f, const Mask& mask) { return weighted_rms(f, &mask); }

Mask valid_after_ddx(const Mask& m) { return valid_after_line(m, true, detail::d1_reach); }
Mask valid_after_d2dx2(const Mask& m) { return valid_after_line(m, true, detail::d2_reach); }
Mask valid_after_ddt(const Mask& m) { return valid_after_line(m, false, detail::d1_reach); }

}  // namespace qpot
