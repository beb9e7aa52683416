// The inversion pipeline: starting from a quantum potential Q(x,t) and an
// amplitude R solved per slice, build the momentum field p from the
// continuity equation, reconstruct (or accept) the classical potential V,
// build the phase S by time quadrature of the Hamilton-Jacobi equation, and
// evaluate every governing residual.
//
// Nodal points (|R| below a floor) make p = flux/R^2 singular; such nodes
// are masked, carry placeholder values, and are excluded from all norms.
// Stencil-based quantities are additionally invalidated wherever their
// stencil reads a masked node, and cumulative integrals are invalidated
// beyond the first masked node they cross.

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qpot/elliptic.hpp"
#include "qpot/expr.hpp"
#include "qpot/fieldops.hpp"
#include "qpot/grid.hpp"

namespace qpot {

/// A field together with its node-validity mask.
struct MaskedField {
  Field field;
  Mask valid;
};

inline MaskedField unmasked(Field f) {
  Mask m(f.grid, true);
  return {std::move(f), std::move(m)};
}

/// Gauge function g(x): per-node value and validity on the x axis.
struct Gauge {
  std::vector<double> value;
  std::vector<std::uint8_t> valid;
};

struct ResidualNorms {
  double linf = 0.0;
  double l2 = 0.0;
};

struct ResidualField {
  Field field;
  Mask valid;
  ResidualNorms norms;
};

/// Pipeline options. Null f_expr means f == 0; null g_expr selects the
/// automatic gauge g = int_{x_ref}^x p(.,t0) dx' (which zeroes the
/// compatibility residual on the initial slice); null v_expr selects
/// reconstruct mode (V built from the Newton-law identity). Expressions must
/// be closed (constants bound). x_ref = NaN defaults to the left edge.
struct PipelineConfig {
  PhysParams params;
  AstPtr f_expr;
  AstPtr g_expr;
  AstPtr v_expr;
  double r_floor_rel = 1e-8;
  double x_ref = std::numeric_limits<double>::quiet_NaN();
  double sigma_tol_rel = 1e-8;
  double mu = 0.0;

  bool reconstruct_v() const { return v_expr == nullptr; }
  double resolved_x_ref(const SpaceTimeGrid& g) const {
    return std::isnan(x_ref) ? g.x0 : x_ref;
  }
};

struct PipelineResult {
  Field R, p, S, V, Q_used;
  MaskedField dV;  // only populated in reconstruct mode
  bool has_dV = false;

  Mask r_mask;  // |R| > r_floor
  Mask p_valid, s_valid, v_valid;
  double r_floor_abs = 0.0;
  double masked_fraction = 0.0;
  double v_staticity_defect = 0.0;

  bool psi_emitted = false;
  ComplexField psi;

  ResidualField continuity, hj, newton, compatibility, se_real, se_imag;
  std::vector<SolveReport> slice_reports;

  /// Norm table in reporting order.
  std::vector<std::pair<std::string, ResidualNorms>> residual_norms() const;
};

/// p = m (f(t) - int_{x_ref}^x d/dt(R^2) dx') / R^2 on nodes with |R| above
/// the floor. f_expr (may be null) is evaluated as a function of t at
/// x = x_ref. Throws when some slice has every node below the floor.
MaskedField momentum_field(const Field& R, const ExprAst* f_expr, const PhysParams& params,
                           double x_ref, double r_floor_abs);

/// S = g(x) - int_{t0}^t (Q + V + p^2/2m) dt'. S(.,t0) = g; a column becomes
/// invalid from the first masked integrand slice onward.
MaskedField phase_field(const MaskedField& p, const Field& Q, const MaskedField& V,
                        const Gauge& g, const PhysParams& params);

/// dV = -dp/dt - p dp/dx / m - dQ/dx (the Newton-law identity solved for the
/// potential gradient, with Q folded in).
MaskedField reconstruct_dV(const MaskedField& p, const Field& Q, const PhysParams& params);

/// V(x,t) = int_{x_ref}^x dV dx', pinned to V(x_ref,.) = 0 (any additive
/// v0(t) is a gauge freedom absorbable into S). Reports the staticity defect
/// linf(V - V(.,t0)) when requested.
MaskedField integrate_V(const MaskedField& dV, double x_ref,
                        double* staticity_defect = nullptr);

/// Q_rec = -(hbar^2/2m) (d2R/dx2) / R on nodes with |R| above the floor.
/// Invariant under any rescaling of R.
MaskedField quantum_potential(const Field& R, const PhysParams& params,
                              double r_floor_abs = 0.0);

/// d/dt(R^2) + (1/m) d/dx(R^2 p); small by construction of momentum_field.
ResidualField residual_continuity(const Field& R, const MaskedField& p,
                                  const PhysParams& params);

/// dS/dt + (dS/dx)^2/2m + Q + V, with the gradient taken from S itself (not
/// from p), so this is a genuine check of the assembled phase.
ResidualField residual_hj(const MaskedField& S, const Field& Q, const MaskedField& V,
                          const PhysParams& params);

/// dS/dx - p: the integrability gap between the quadrature-built phase and
/// the momentum field.
ResidualField residual_compatibility(const MaskedField& S, const MaskedField& p);

/// dp/dt + p dp/dx / m + d(Q+V)/dx; zero up to quadrature defects when V was
/// reconstructed.
ResidualField residual_newton(const MaskedField& p, const Field& Q, const MaskedField& V,
                              const PhysParams& params);

/// Schroedinger residual of psi = R exp(iS/hbar):
/// -(hbar^2/2m) psi_xx + V psi - i hbar psi_t, split into real and imaginary
/// parts. Up to stencil error, real = R * (HJ residual with the quantum
/// potential of R) and imag = -(hbar/2R) * (continuity residual with dS/dx).
std::pair<ResidualField, ResidualField> residual_se(const Field& R, const MaskedField& S,
                                                    const MaskedField& V,
                                                    const PhysParams& params);

/// Automatic gauge: g = int_{x_ref}^x p(.,t0) dx'.
Gauge auto_gauge(const MaskedField& p, double x_ref);

/// Full pipeline: solve R per slice, build p, V (reconstructed or given),
/// g, S, all residuals, and psi (withheld when more than half the nodes are
/// masked). Boundary data is one value per slice and side.
PipelineResult run_pipeline(const Field& Q, const PipelineConfig& config,
                            std::span<const double> bc_left,
                            std::span<const double> bc_right);

/// Same pipeline for an amplitude produced outside the slice solver (e.g.
/// the kernel mode at a Sigma point, where the boundary-value problem has no
/// unique solution). slice_reports, when given, are attached verbatim.
PipelineResult run_pipeline_with_amplitude(const Field& Q, Field R,
                                           const PipelineConfig& config,
                                           std::vector<SolveReport> slice_reports = {});

}  // namespace qpot
