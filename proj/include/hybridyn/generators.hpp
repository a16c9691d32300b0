#pragma once

#include <ostream>

#include "hybridyn/coarse_grain.hpp"
#include "hybridyn/hybrid_state.hpp"

namespace hybridyn {

// H(x,p) = h_q + h_c(x,p) I + h_int(x,p), every piece Hermitian.
template <int D>
struct HybridHamiltonian {
  Mat<D> h_q = Mat<D>::Zero();
  ScalarField h_c;
  MatrixField<D> h_int;

  HybridHamiltonian(const Mat<D>& hq, ScalarField hc, MatrixField<D> hi)
      : h_q(hq), h_c(std::move(hc)), h_int(std::move(hi)) {
    detail::require_same_grid(h_c.grid, h_int.grid);
    validate();
  }

  // h_q and a classical potential only
  HybridHamiltonian(const Mat<D>& hq, ScalarField hc)
      : h_q(hq), h_c(std::move(hc)), h_int(h_c.grid) {
    validate();
  }

  void validate() const {
    if (element_traits<Mat<D>>::herm_defect(h_q) > 1e-12)
      throw ValidationError("h_q not Hermitian");
    if (h_int.hermiticity_defect() > 1e-12)
      throw ValidationError("h_int not Hermitian");
    for (double v : h_c.v)
      if (!std::isfinite(v)) throw ValidationError("h_c has non-finite entries");
  }

  const PhaseGrid& grid() const { return h_c.grid; }
};

// Assembled H field with its phase-space gradients. The H side always uses
// the centered stencil: it is exact for the polynomial Hamiltonians this
// library targets and assumes nothing about periodicity, while state
// derivatives may use either scheme. vmax bounds the classical transport
// speed (largest cell spectral norm of dH/dx and dH/dp) for step control.
template <int D>
struct HamTerms {
  MatrixField<D> h, hx, hp;
  double vmax = 0.0;

  explicit HamTerms(const HybridHamiltonian<D>& H)
      : h(H.grid()), hx(H.grid()), hp(H.grid()) {
    const Mat<D> id = Mat<D>::Identity();
    for (int c = 0; c < h.grid.size(); ++c)
      h.v[c] = H.h_q + H.h_c.v[c] * id + H.h_int.v[c];
    hx = partial_x(h, Deriv::central2);
    hp = partial_p(h, Deriv::central2);
    for (int c = 0; c < h.grid.size(); ++c)
      vmax = std::max({vmax, spec_norm_herm<D>(hx.v[c]), spec_norm_herm<D>(hp.v[c])});
  }
};

namespace detail {

// -i[H, rho] + (1/2){dH/dx, drho/dp}_+ - (1/2){dH/dp, drho/dx}_+
// which is the cellwise commutator plus the symmetrized Poisson brackets
// (1/2){H, rho}_P - (1/2){rho, H}_P regrouped by derivative factor. Adding
// the commutator corrections -(i/2)[dH/dx, drho/dx] - (i/2)[dH/dp, drho/dp]
// restores complete positivity on coarse-grained states.
template <int D>
MatrixField<D> hybrid_rhs(const HamTerms<D>& T, const MatrixField<D>& rho,
                          Deriv scheme, bool corrected) {
  detail::require_same_grid(T.h.grid, rho.grid);
  const MatrixField<D> rx = partial_x(rho, scheme);
  const MatrixField<D> rp = partial_p(rho, scheme);
  MatrixField<D> out(rho.grid);
  const cplx mi(0.0, -1.0);
  for (int c = 0; c < rho.grid.size(); ++c) {
    const Mat<D>& H = T.h.v[c];
    const Mat<D>& Hx = T.hx.v[c];
    const Mat<D>& Hp = T.hp.v[c];
    const Mat<D>& r = rho.v[c];
    Mat<D> g = mi * (H * r - r * H);
    g += 0.5 * (Hx * rp.v[c] + rp.v[c] * Hx);
    g -= 0.5 * (Hp * rx.v[c] + rx.v[c] * Hp);
    if (corrected) {
      g += 0.5 * mi * (Hx * rx.v[c] - rx.v[c] * Hx);
      g += 0.5 * mi * (Hp * rp.v[c] - rp.v[c] * Hp);
    }
    out.v[c] = g;
  }
  out.hermitian = rho.hermitian;
  return out;
}

}  // namespace detail

template <int D>
MatrixField<D> naive_generator(const HybridHamiltonian<D>& H, const HybridState<D>& s,
                               Deriv scheme = Deriv::central2) {
  return detail::hybrid_rhs(HamTerms<D>(H), s.field, scheme, false);
}

// Positivity of the corrected flow is only guaranteed on coarse-grained
// states; when a warning stream is supplied, inadmissible input is reported
// there instead of raising.
template <int D>
MatrixField<D> corrected_generator(const HybridHamiltonian<D>& H, const HybridState<D>& s,
                                   Deriv scheme = Deriv::central2,
                                   std::ostream* warn = nullptr) {
  if (warn) {
    const Admissibility a = admissibility_check(s.field);
    if (!a.admissible)
      *warn << "warning: state below coarse-graining scale (distance " << a.distance
            << "), corrected generator may not preserve positivity\n";
  }
  return detail::hybrid_rhs(HamTerms<D>(H), s.field, scheme, true);
}

// The commutator corrections alone, for comparing the two generators.
template <int D>
MatrixField<D> correction_terms(const HybridHamiltonian<D>& H, const HybridState<D>& s,
                                Deriv scheme = Deriv::central2) {
  const HamTerms<D> T(H);
  const MatrixField<D> rx = partial_x(s.field, scheme);
  const MatrixField<D> rp = partial_p(s.field, scheme);
  MatrixField<D> out(s.field.grid);
  const cplx mi(0.0, -1.0);
  for (int c = 0; c < out.grid.size(); ++c) {
    out.v[c] = 0.5 * mi * (T.hx.v[c] * rx.v[c] - rx.v[c] * T.hx.v[c]);
    out.v[c] += 0.5 * mi * (T.hp.v[c] * rp.v[c] - rp.v[c] * T.hp.v[c]);
  }
  return out;
}

}  // namespace hybridyn
