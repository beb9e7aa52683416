// Finite-difference derivatives, cumulative trapezoid quadratures, and norms
// on sampled fields. All stencils are second order; boundary nodes use
// one-sided closures whose leading error constant equals the interior
// stencil's, so error fields stay smooth up to the edges and derived
// quantities (d/dt of a computed field, FD residuals) remain second order
// there too.

#pragma once

#include <span>

#include "qpot/grid.hpp"

namespace qpot {

/// d/dx, central in the interior, error-matched one-sided at the two
/// boundary nodes (plain one-sided on grids too small for the wide closure).
/// Exact for quadratics.
Field ddx(const Field& f);

/// d2/dx2 with the three-point interior stencil and error-matched one-sided
/// closures. Exact for quadratics (for cubics at the boundary).
Field d2dx2(const Field& f);

/// d/dt across slices; requires nt >= 3.
Field ddt(const Field& f);

ComplexField ddt(const ComplexField& f);
ComplexField d2dx2(const ComplexField& f);

/// Per-slice cumulative trapezoid integral from x_ref: F(x,t) =
/// int_{x_ref}^{x} f dx'. F(x_ref,.) = 0; off-node x_ref is handled by a
/// partial cell with linearly interpolated integrand.
Field cumint_x(const Field& f, double x_ref);
inline Field cumint_x(const Field& f) { return cumint_x(f, f.grid.x0); }

/// Per-column cumulative trapezoid integral from t0; requires nt >= 2.
Field cumint_t(const Field& f);

/// Max-abs norm (0 for an empty mask selection).
double linf(const Field& f);
double linf(const Field& f, const Mask& mask);

/// Grid-weighted root mean square: sqrt of the trapezoid-weighted average of
/// f^2 over the space-time domain (restricted to kept nodes when masked).
double l2(const Field& f);
double l2(const Field& f, const Mask& mask);

/// Validity masks after applying a stencil: an output node is kept only when
/// every input node its stencil reads is kept.
Mask valid_after_ddx(const Mask& m);
Mask valid_after_d2dx2(const Mask& m);
Mask valid_after_ddt(const Mask& m);

namespace detail {
/// Inclusive index range read by the first/second-derivative stencil at
/// position i of an n-point line.
std::pair<int, int> d1_reach(int i, int n);
std::pair<int, int> d2_reach(int i, int n);
}  // namespace detail

}  // namespace qpot
