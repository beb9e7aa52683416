// Uniform space-time grids, sampled fields, physical constants, node masks.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "qpot/errors.hpp"

namespace qpot {

/// Uniform discretization of Omega x [t0,t1] with nx space nodes and nt time
/// slices. Spacings are derived, never stored, so x0 + i*h reproduces nodes
/// exactly. nt == 1 is allowed for static problems; tau() then throws.
struct SpaceTimeGrid {
  double x0 = 0.0, x1 = 1.0;
  int nx = 3;
  double t0 = 0.0, t1 = 0.0;
  int nt = 1;

  SpaceTimeGrid() = default;
  SpaceTimeGrid(double x0_, double x1_, int nx_, double t0_, double t1_, int nt_)
      : x0(x0_), x1(x1_), nx(nx_), t0(t0_), t1(t1_), nt(nt_) {
    validate();
  }

  void validate() const {
    if (!(x1 > x0)) throw GridError("grid: x1 must exceed x0");
    if (!(t1 >= t0)) throw GridError("grid: t1 must be >= t0");
    if (nx < 3) throw GridError("grid: nx must be at least 3");
    if (nt < 1) throw GridError("grid: nt must be at least 1");
    if (nt > 1 && !(t1 > t0)) throw GridError("grid: nt > 1 requires t1 > t0");
    if (!std::isfinite(x0) || !std::isfinite(x1) || !std::isfinite(t0) || !std::isfinite(t1))
      throw GridError("grid: extents must be finite");
  }

  double h() const { return (x1 - x0) / (nx - 1); }
  double tau() const {
    if (nt < 2) throw GridError("grid: time step undefined for a single slice");
    return (t1 - t0) / (nt - 1);
  }
  double x(int i) const { return x0 + i * h(); }
  double t(int j) const { return nt == 1 ? t0 : t0 + j * tau(); }
  long long size() const { return static_cast<long long>(nx) * nt; }

  bool operator==(const SpaceTimeGrid&) const = default;
};

/// hbar and mass; beta = 2m/hbar^2 is the coupling in the elliptic operator.
struct PhysParams {
  double hbar = 1.0;
  double m = 1.0;

  PhysParams() = default;
  PhysParams(double hbar_, double m_) : hbar(hbar_), m(m_) {
    if (!(hbar > 0.0) || !(m > 0.0)) throw Error("physics: hbar and m must be positive");
  }

  double beta() const { return 2.0 * m / (hbar * hbar); }
};

/// Real scalar samples on a grid, shape nt x nx, slice-major.
struct Field {
  SpaceTimeGrid grid;
  std::vector<double> v;

  Field() = default;
  explicit Field(const SpaceTimeGrid& g, double fill = 0.0)
      : grid(g), v(static_cast<std::size_t>(g.size()), fill) {}

  int nx() const { return grid.nx; }
  int nt() const { return grid.nt; }
  double& at(int j, int i) { return v[static_cast<std::size_t>(j) * grid.nx + i]; }
  double at(int j, int i) const { return v[static_cast<std::size_t>(j) * grid.nx + i]; }

  void require_finite(const char* what) const {
    for (double a : v)
      if (!std::isfinite(a)) throw Error(std::string(what) + ": field contains non-finite values");
  }
};

/// Complex samples on a grid (psi and Schroedinger residuals).
struct ComplexField {
  SpaceTimeGrid grid;
  std::vector<std::complex<double>> v;

  ComplexField() = default;
  explicit ComplexField(const SpaceTimeGrid& g)
      : grid(g), v(static_cast<std::size_t>(g.size())) {}

  int nx() const { return grid.nx; }
  int nt() const { return grid.nt; }
  std::complex<double>& at(int j, int i) { return v[static_cast<std::size_t>(j) * grid.nx + i]; }
  std::complex<double> at(int j, int i) const { return v[static_cast<std::size_t>(j) * grid.nx + i]; }
};

/// Node validity mask. Masked nodes (keep == 0) carry placeholder values in
/// the companion field and are excluded from norms and downstream checks.
struct Mask {
  int nx = 0, nt = 0;
  std::vector<std::uint8_t> keep;

  Mask() = default;
  explicit Mask(const SpaceTimeGrid& g, bool value = true)
      : nx(g.nx), nt(g.nt), keep(static_cast<std::size_t>(g.size()), value ? 1 : 0) {}

  bool ok(int j, int i) const { return keep[static_cast<std::size_t>(j) * nx + i] != 0; }
  void set(int j, int i, bool value) { keep[static_cast<std::size_t>(j) * nx + i] = value ? 1 : 0; }

  long long kept_count() const {
    long long n = 0;
    for (auto k : keep) n += k;
    return n;
  }
  double masked_fraction() const {
    return keep.empty() ? 0.0 : 1.0 - double(kept_count()) / double(keep.size());
  }

  /// Intersection with another mask of the same shape.
  Mask& operator&=(const Mask& o) {
    if (o.nx != nx || o.nt != nt) throw GridError("mask: shape mismatch");
    for (std::size_t k = 0; k < keep.size(); ++k) keep[k] = keep[k] && o.keep[k];
    return *this;
  }
};

inline void require_same_grid(const Field& a, const Field& b, const char* what) {
  if (!(a.grid == b.grid)) throw GridError(std::string(what) + ": fields live on different grids");
}

}  // namespace qpot
