#pragma once

#include <cstdint>

#include "hybridyn/generators.hpp"

namespace hybridyn {

// Phase-space velocity field of the conditional means. Cells whose mass is
// below the conditioning threshold have no conditional state; they are
// flagged rather than raising, with the velocities left at zero.
struct FlowField {
  ScalarField xdot, pdot;
  std::vector<std::uint8_t> defined;

  FlowField(const PhaseGrid& g) : xdot(g), pdot(g), defined(g.size(), 0) {}
};

// xdot = tr(dH/dp rho_xp), pdot = -tr(dH/dx rho_xp) with rho_xp the
// conditional state at the cell.
template <int D>
FlowField mean_field_flow(const HybridHamiltonian<D>& H, const HybridState<D>& s) {
  detail::require_same_grid(s.field.grid, H.h_int.grid);
  const HamTerms<D> T(H);
  FlowField flow(s.grid());
  double peak = 0.0;
  for (int c = 0; c < s.grid().size(); ++c)
    peak = std::max(peak, std::abs(s.field.v[c].trace().real()));
  const double thr = 1e-12 * peak;
  for (int c = 0; c < s.grid().size(); ++c) {
    const double mass = s.field.v[c].trace().real();
    if (mass <= thr) continue;
    flow.defined[c] = 1;
    flow.xdot.v[c] = (T.hp.v[c] * s.field.v[c]).trace().real() / mass;
    flow.pdot.v[c] = -(T.hx.v[c] * s.field.v[c]).trace().real() / mass;
  }
  return flow;
}

// d(rho_C)/dt predicted by the continuity equation for the mean-field flow:
// -d/dx (rho_C xdot) - d/dp (rho_C pdot). Undefined cells carry no mass at
// working precision, so their zero velocities do not disturb the divergence.
inline ScalarField continuity_divergence(const ScalarField& rho_c, const FlowField& flow,
                                         Deriv scheme = Deriv::central2) {
  detail::require_same_grid(rho_c.grid, flow.xdot.grid);
  ScalarField fx(rho_c.grid), fp(rho_c.grid);
  for (int c = 0; c < rho_c.grid.size(); ++c) {
    fx.v[c] = rho_c.v[c] * flow.xdot.v[c];
    fp.v[c] = rho_c.v[c] * flow.pdot.v[c];
  }
  const ScalarField dfx = partial_x(fx, scheme);
  const ScalarField dfp = partial_p(fp, scheme);
  ScalarField out(rho_c.grid);
  for (int c = 0; c < rho_c.grid.size(); ++c) out.v[c] = -dfx.v[c] - dfp.v[c];
  return out;
}

// L1 gap between the marginal equation of motion under the corrected
// generator and the continuity prediction. Vanishes with the grid spacing;
// exactly zero (to rounding) when the conditional state is cell-independent.
template <int D>
double marginal_consistency_l1(const HybridHamiltonian<D>& H, const HybridState<D>& s,
                               Deriv scheme = Deriv::central2) {
  const HamTerms<D> T(H);
  const MatrixField<D> gen = detail::hybrid_rhs(T, s.field, scheme, true);
  const ScalarField ddt = trace_field(gen);
  const ScalarField div = continuity_divergence(classical_marginal(s),
                                                mean_field_flow(H, s), scheme);
  double l1 = 0.0;
  for (int c = 0; c < ddt.grid.size(); ++c) l1 += std::abs(ddt.v[c] - div.v[c]);
  return l1 * ddt.grid.cell_area();
}

}  // namespace hybridyn
