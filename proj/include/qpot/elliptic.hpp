// Per-slice two-point boundary value problems for the amplitude R:
//
//   -R'' - beta*Q*R + mu*R = g   on (x0, x1),  R(x0), R(x1) given,
//
// discretized with the three-point stencil on interior nodes. Solvability is
// tracked through the spectrum of the symmetric tridiagonal interior
// operator T = -Lap_h - beta*diag(Q): the problem has a unique solution iff
// no eigenvalue of T + mu*I sits at zero. Eigenvalues come from Sturm-count
// bisection; the linear solves use the Thomas algorithm with iterative
// refinement and a pivoting fallback.

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qpot/grid.hpp"

namespace qpot {

/// One slice of the elliptic problem. `q` has one entry per grid node
/// (boundary nodes included); `g` is the source term (empty means zero).
struct EllipticProblem {
  int nx = 0;
  double h = 0.0;
  std::vector<double> q;
  double beta = 1.0;
  double mu = 0.0;
  double r_left = 0.0, r_right = 0.0;
  std::vector<double> g;
  double sigma_tol_rel = 1e-8;  // singularity threshold, relative to the operator norm

  void validate() const;
};

/// Solvability diagnostics for one slice.
///
/// coercivity_margin = mu + lambda_1(-Lap_h) - beta * sup Q, the operator
/// lower bound; positive margin certifies unique solvability. sigma_distance
/// is |lambda| for the eigenvalue of the shifted operator nearest zero (for
/// mu = 0 this is the distance of 0 from the discrete Sigma set).
struct SolveReport {
  bool coercive = false;
  double coercivity_margin = 0.0;
  double sigma_distance = 0.0;
  double condition_estimate = 0.0;
};

/// Solves one slice. Throws SingularSystemError naming the offending
/// eigenvalue when sigma_distance <= max(1e-10, sigma_tol_rel*||T||cart).
std::pair<std::vector<double>, SolveReport> solve_slice(const EllipticProblem& p);

/// Solves every time slice independently (parallel across slices). Boundary
/// values are per-slice samples; g_rhs may be null for a zero source. On
/// singular slices, throws one SingularSystemError aggregating all failures
/// with their slice indices.
std::pair<Field, std::vector<SolveReport>> solve_all_slices(
    const Field& Q, const PhysParams& params, double mu,
    std::span<const double> bc_left, std::span<const double> bc_right,
    const Field* g_rhs = nullptr, double sigma_tol_rel = 1e-8);

/// Lowest n_eigs eigenvalues of T = -Lap_h - beta*diag(q), ascending. These
/// discretize the solvability spectrum Sigma: the shifted equation with
/// shift lambda is uniquely solvable iff lambda avoids them.
std::vector<double> sigma_spectrum(std::span<const double> q, double h, double beta,
                                   int n_eigs);

/// Sufficient coercivity test: coercive iff
/// mu + lambda_1(-Lap_h) - beta*sup(q) > 0. Returns (coercive, margin).
std::pair<bool, double> coercivity_check(std::span<const double> q, double h, double beta,
                                         double mu);

/// Eigenvalue of -Lap_h - beta*diag(q) + mu*I nearest zero.
double nearest_sigma_eigenvalue(std::span<const double> q, double h, double beta,
                                double mu = 0.0);

/// Solvability diagnostics without solving (used when the amplitude is
/// produced by other means, e.g. a kernel mode).
SolveReport diagnose_slice(std::span<const double> q, double h, double beta,
                           double mu = 0.0);

/// Eigenvector of T = -Lap_h - beta*diag(q) for the eigenvalue nearest
/// `lambda`, by inverse iteration. Returns a full-grid vector (zero at the
/// boundary nodes, Dirichlet), normalized to unit max-abs. This is the
/// discrete amplitude at a Sigma point, where the boundary-value problem
/// itself has no unique solution.
std::vector<double> sigma_eigenvector(std::span<const double> q, double h, double beta,
                                      double lambda);

/// Gershgorin bound on the same operator's spectral radius (the scale used
/// by the relative singularity tolerance).
double operator_norm_bound(std::span<const double> q, double h, double beta,
                           double mu = 0.0);

/// First Dirichlet eigenvalue of the discrete Laplacian on an nx-node grid
/// with spacing h (closed form, exact for the discrete operator).
double laplacian_lambda1(int nx, double h);

}  // namespace qpot
