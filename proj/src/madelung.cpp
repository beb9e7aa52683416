#include "qpot/madelung.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace qpot {
namespace {

ResidualNorms masked_norms(const Field& f, const Mask& valid) {
  return {linf(f, valid), l2(f, valid)};
}

ResidualField make_residual(Field f, Mask valid) {
  ResidualField r{std::move(f), std::move(valid), {}};
  r.norms = masked_norms(r.field, r.valid);
  return r;
}

// Contiguous valid run containing the integration base point; everything on
// the far side of a masked node is invalidated (the prefix sum has
// integrated through an undefined value there).
void restrict_to_run(const Mask& in, int i_ref_lo, int i_ref_hi, Mask& out) {
  out = in;
  for (int j = 0; j < in.nt; ++j) {
    bool base_ok = true;
    for (int q = i_ref_lo; q <= i_ref_hi; ++q) base_ok = base_ok && in.ok(j, q);
    if (!base_ok) {
      for (int i = 0; i < in.nx; ++i) out.set(j, i, false);
      continue;
    }
    for (int i = i_ref_hi + 1, alive = true; i < in.nx; ++i) {
      alive = alive && in.ok(j, i);
      out.set(j, i, alive);
    }
    for (int i = i_ref_lo - 1, alive = true; i >= 0; --i) {
      alive = alive && in.ok(j, i);
      out.set(j, i, alive);
    }
  }
}

// Cell indices the base point touches (two nodes when x_ref is off-node).
std::pair<int, int> ref_cell(const SpaceTimeGrid& g, double x_ref) {
  double s = (x_ref - g.x0) / g.h();
  int lo = std::clamp(static_cast<int>(std::floor(s)), 0, g.nx - 2);
  double frac = s - lo;
  return {lo, frac > 0.0 ? lo + 1 : lo};
}

}  // namespace

std::vector<std::pair<std::string, ResidualNorms>> PipelineResult::residual_norms() const {
  return {
      {"continuity", continuity.norms},       {"hj", hj.norms},
      {"newton", newton.norms},               {"compatibility", compatibility.norms},
      {"se_real", se_real.norms},             {"se_imag", se_imag.norms},
  };
}

MaskedField momentum_field(const Field& R, const ExprAst* f_expr, const PhysParams& params,
                           double x_ref, double r_floor_abs) {
  const auto& g = R.grid;
  if (g.nt < 3) throw GridError("momentum_field: needs at least 3 time slices");
  if (!(r_floor_abs > 0.0)) throw Error("momentum_field: r_floor must be positive");

  Field R2(g);
  for (std::size_t k = 0; k < R.v.size(); ++k) R2.v[k] = R.v[k] * R.v[k];
  Field flux_int = cumint_x(ddt(R2), x_ref);

  MaskedField out{Field(g), Mask(g, true)};
  for (int j = 0; j < g.nt; ++j) {
    double fj = f_expr ? eval(*f_expr, x_ref, g.t(j), params) : 0.0;
    bool any_kept = false;
    for (int i = 0; i < g.nx; ++i) {
      if (std::fabs(R.at(j, i)) > r_floor_abs) {
        out.field.at(j, i) = params.m * (fj - flux_int.at(j, i)) / R2.at(j, i);
        any_kept = true;
      } else {
        out.field.at(j, i) = 0.0;
        out.valid.set(j, i, false);
      }
    }
    if (!any_kept)
      throw Error("momentum_field: slice " + std::to_string(j) +
                  " has R below the nodal floor everywhere");
  }
  return out;
}

Gauge auto_gauge(const MaskedField& p, double x_ref) {
  const auto& g = p.field.grid;
  SpaceTimeGrid xline(g.x0, g.x1, g.nx, 0.0, 0.0, 1);
  Field p0(xline);
  Mask m0(xline, true);
  for (int i = 0; i < g.nx; ++i) {
    p0.at(0, i) = p.field.at(0, i);
    m0.set(0, i, p.valid.ok(0, i));
  }
  Field gx = cumint_x(p0, x_ref);
  auto [lo, hi] = ref_cell(xline, x_ref);
  Mask gmask(xline, true);
  restrict_to_run(m0, lo, hi, gmask);

  Gauge out;
  out.value.resize(g.nx);
  out.valid.resize(g.nx);
  for (int i = 0; i < g.nx; ++i) {
    out.value[i] = gx.at(0, i);
    out.valid[i] = gmask.ok(0, i) ? 1 : 0;
  }
  return out;
}

MaskedField phase_field(const MaskedField& p, const Field& Q, const MaskedField& V,
                        const Gauge& g, const PhysParams& params) {
  const auto& grid = p.field.grid;
  require_same_grid(p.field, Q, "phase_field");
  require_same_grid(p.field, V.field, "phase_field");
  if (static_cast<int>(g.value.size()) != grid.nx)
    throw GridError("phase_field: gauge size mismatch");

  Field theta(grid);
  Mask theta_valid = p.valid;
  theta_valid &= V.valid;
  for (int j = 0; j < grid.nt; ++j)
    for (int i = 0; i < grid.nx; ++i)
      theta.at(j, i) = Q.at(j, i) + V.field.at(j, i) +
                       p.field.at(j, i) * p.field.at(j, i) / (2.0 * params.m);

  Field acc = cumint_t(theta);
  MaskedField out{Field(grid), Mask(grid, true)};
  for (int i = 0; i < grid.nx; ++i) {
    bool alive = g.valid[i] != 0;
    for (int j = 0; j < grid.nt; ++j) {
      alive = alive && theta_valid.ok(j, i);
      out.field.at(j, i) = g.value[i] - acc.at(j, i);
      out.valid.set(j, i, alive);
    }
  }
  return out;
}

MaskedField reconstruct_dV(const MaskedField& p, const Field& Q, const PhysParams& params) {
  const auto& grid = p.field.grid;
  require_same_grid(p.field, Q, "reconstruct_dV");
  Field pdot = ddt(p.field);
  Field pprime = ddx(p.field);
  Field qprime = ddx(Q);

  MaskedField out{Field(grid), valid_after_ddt(p.valid)};
  out.valid &= valid_after_ddx(p.valid);
  for (std::size_t k = 0; k < out.field.v.size(); ++k)
    out.field.v[k] =
        -pdot.v[k] - p.field.v[k] * pprime.v[k] / params.m - qprime.v[k];
  return out;
}

MaskedField integrate_V(const MaskedField& dV, double x_ref, double* staticity_defect) {
  const auto& grid = dV.field.grid;
  MaskedField out{cumint_x(dV.field, x_ref), Mask(grid, true)};
  auto [lo, hi] = ref_cell(grid, x_ref);
  restrict_to_run(dV.valid, lo, hi, out.valid);

  if (staticity_defect) {
    double d = 0.0;
    for (int j = 0; j < grid.nt; ++j)
      for (int i = 0; i < grid.nx; ++i)
        if (out.valid.ok(j, i) && out.valid.ok(0, i))
          d = std::max(d, std::fabs(out.field.at(j, i) - out.field.at(0, i)));
    *staticity_defect = d;
  }
  return out;
}

MaskedField quantum_potential(const Field& R, const PhysParams& params, double r_floor_abs) {
  Field rxx = d2dx2(R);
  const double coef = -params.hbar * params.hbar / (2.0 * params.m);
  MaskedField out{Field(R.grid), Mask(R.grid, true)};
  for (std::size_t k = 0; k < R.v.size(); ++k) {
    if (std::fabs(R.v[k]) > r_floor_abs) {
      out.field.v[k] = coef * rxx.v[k] / R.v[k];
    } else {
      out.field.v[k] = 0.0;
      out.valid.keep[k] = 0;
    }
  }
  return out;
}

ResidualField residual_continuity(const Field& R, const MaskedField& p,
                                  const PhysParams& params) {
  const auto& grid = R.grid;
  require_same_grid(R, p.field, "residual_continuity");
  Field R2(grid), flux(grid);
  for (std::size_t k = 0; k < R.v.size(); ++k) {
    R2.v[k] = R.v[k] * R.v[k];
    flux.v[k] = R2.v[k] * p.field.v[k];
  }
  Field res = ddt(R2);
  Field dflux = ddx(flux);
  for (std::size_t k = 0; k < res.v.size(); ++k) res.v[k] += dflux.v[k] / params.m;
  Mask valid = valid_after_ddx(p.valid);
  return make_residual(std::move(res), std::move(valid));
}

ResidualField residual_hj(const MaskedField& S, const Field& Q, const MaskedField& V,
                          const PhysParams& params) {
  const auto& grid = S.field.grid;
  require_same_grid(S.field, Q, "residual_hj");
  require_same_grid(S.field, V.field, "residual_hj");
  Field st = ddt(S.field);
  Field sx = ddx(S.field);
  Field res(grid);
  for (std::size_t k = 0; k < res.v.size(); ++k)
    res.v[k] = st.v[k] + sx.v[k] * sx.v[k] / (2.0 * params.m) + Q.v[k] + V.field.v[k];
  Mask valid = valid_after_ddt(S.valid);
  valid &= valid_after_ddx(S.valid);
  valid &= V.valid;
  return make_residual(std::move(res), std::move(valid));
}

ResidualField residual_compatibility(const MaskedField& S, const MaskedField& p) {
  require_same_grid(S.field, p.field, "residual_compatibility");
  Field res = ddx(S.field);
  for (std::size_t k = 0; k < res.v.size(); ++k) res.v[k] -= p.field.v[k];
  Mask valid = valid_after_ddx(S.valid);
  valid &= p.valid;
  return make_residual(std::move(res), std::move(valid));
}

ResidualField residual_newton(const MaskedField& p, const Field& Q, const MaskedField& V,
                              const PhysParams& params) {
  const auto& grid = p.field.grid;
  require_same_grid(p.field, Q, "residual_newton");
  require_same_grid(p.field, V.field, "residual_newton");
  Field qv(grid);
  for (std::size_t k = 0; k < qv.v.size(); ++k) qv.v[k] = Q.v[k] + V.field.v[k];
  Field pdot = ddt(p.field);
  Field pprime = ddx(p.field);
  Field dqv = ddx(qv);
  Field res(grid);
  for (std::size_t k = 0; k < res.v.size(); ++k)
    res.v[k] = pdot.v[k] + p.field.v[k] * pprime.v[k] / params.m + dqv.v[k];
  Mask valid = valid_after_ddt(p.valid);
  valid &= valid_after_ddx(p.valid);
  valid &= valid_after_ddx(V.valid);
  return make_residual(std::move(res), std::move(valid));
}

std::pair<ResidualField, ResidualField> residual_se(const Field& R, const MaskedField& S,
                                                    const MaskedField& V,
                                                    const PhysParams& params) {
  const auto& grid = R.grid;
  require_same_grid(R, S.field, "residual_se");
  require_same_grid(R, V.field, "residual_se");
  const std::complex<double> iu(0.0, 1.0);

  ComplexField psi(grid);
  for (std::size_t k = 0; k < R.v.size(); ++k)
    psi.v[k] = S.valid.keep[k]
                   ? R.v[k] * std::exp(iu * S.field.v[k] / params.hbar)
                   : std::complex<double>(0.0, 0.0);

  ComplexField psi_xx = d2dx2(psi);
  ComplexField psi_t = ddt(psi);
  const double kin = -params.hbar * params.hbar / (2.0 * params.m);

  Field re(grid), im(grid);
  for (std::size_t k = 0; k < R.v.size(); ++k) {
    std::complex<double> r =
        kin * psi_xx.v[k] + V.field.v[k] * psi.v[k] - iu * params.hbar * psi_t.v[k];
    re.v[k] = r.real();
    im.v[k] = r.imag();
  }
  Mask valid = valid_after_d2dx2(S.valid);
  valid &= valid_after_ddt(S.valid);
  valid &= V.valid;
  Mask valid2 = valid;
  return {make_residual(std::move(re), std::move(valid)),
          make_residual(std::move(im), std::move(valid2))};
}

PipelineResult run_pipeline(const Field& Q, const PipelineConfig& config,
                            std::span<const double> bc_left,
                            std::span<const double> bc_right) {
  auto [R, reports] = solve_all_slices(Q, config.params, config.mu, bc_left, bc_right,
                                       nullptr, config.sigma_tol_rel);
  return run_pipeline_with_amplitude(Q, std::move(R), config, std::move(reports));
}

PipelineResult run_pipeline_with_amplitude(const Field& Q, Field R,
                                           const PipelineConfig& config,
                                           std::vector<SolveReport> slice_reports) {
  const auto& grid = Q.grid;
  require_same_grid(Q, R, "run_pipeline");
  if (grid.nt < 3)
    throw GridError("run_pipeline: the time quadrature needs at least 3 slices");
  const PhysParams& params = config.params;
  const double x_ref = config.resolved_x_ref(grid);

  PipelineResult out;
  out.Q_used = Q;
  out.R = std::move(R);
  out.slice_reports = std::move(slice_reports);

  out.r_floor_abs = config.r_floor_rel * linf(out.R);
  if (!(out.r_floor_abs > 0.0))
    throw Error("run_pipeline: R vanishes identically; nothing to invert");
  out.r_mask = Mask(grid, true);
  for (std::size_t k = 0; k < out.R.v.size(); ++k)
    if (!(std::fabs(out.R.v[k]) > out.r_floor_abs)) out.r_mask.keep[k] = 0;
  out.masked_fraction = out.r_mask.masked_fraction();

  MaskedField p = momentum_field(out.R, config.f_expr.get(), params, x_ref, out.r_floor_abs);

  MaskedField V;
  if (config.reconstruct_v()) {
    out.dV = reconstruct_dV(p, Q, params);
    out.has_dV = true;
    V = integrate_V(out.dV, x_ref, &out.v_staticity_defect);
  } else {
    V = unmasked(eval_field(*config.v_expr, grid, params));
    double d = 0.0;
    for (int j = 0; j < grid.nt; ++j)
      for (int i = 0; i < grid.nx; ++i)
        d = std::max(d, std::fabs(V.field.at(j, i) - V.field.at(0, i)));
    out.v_staticity_defect = d;
  }

  Gauge g;
  if (config.g_expr) {
    g.value.resize(grid.nx);
    g.valid.assign(grid.nx, 1);
    for (int i = 0; i < grid.nx; ++i)
      g.value[i] = eval(*config.g_expr, grid.x(i), grid.t0, params);
  } else {
    g = auto_gauge(p, x_ref);
  }

  MaskedField S = phase_field(p, Q, V, g, params);

  out.continuity = residual_continuity(out.R, p, params);
  out.hj = residual_hj(S, Q, V, params);
  out.newton = residual_newton(p, Q, V, params);
  out.compatibility = residual_compatibility(S, p);
  auto se = residual_se(out.R, S, V, params);
  out.se_real = std::move(se.first);
  out.se_imag = std::move(se.second);

  if (out.masked_fraction <= 0.5) {
    out.psi_emitted = true;
    out.psi = ComplexField(grid);
    const std::complex<double> iu(0.0, 1.0);
    for (std::size_t k = 0; k < out.R.v.size(); ++k)
      out.psi.v[k] = S.valid.keep[k]
                         ? out.R.v[k] * std::exp(iu * S.field.v[k] / params.hbar)
                         : std::complex<double>(0.0, 0.0);
  }

  out.p = std::move(p.field);
  out.p_valid = std::move(p.valid);
  out.S = std::move(S.field);
  out.s_valid = std::move(S.valid);
  out.V = std::move(V.field);
  out.v_valid = std::move(V.valid);
  return out;
}

}  // namespace qpot
