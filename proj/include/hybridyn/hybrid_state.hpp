#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "hybridyn/errors.hpp"
#include "hybridyn/field.hpp"
#include "hybridyn/field_ops.hpp"

namespace hybridyn {

// Smallest eigenvalue of a (numerically) Hermitian matrix. d = 2 uses the
// closed form; any stray anti-Hermitian part below ~1e-12 shifts the result
// by less than that, so callers monitor the defect separately.
template <int D>
double min_eig_herm(const Mat<D>& m) {
  if constexpr (D == 1) {
    return m(0, 0).real();
  } else if constexpr (D == 2) {
    const double a = m(0, 0).real(), c = m(1, 1).real();
    const double h = 0.5 * (a - c);
    return 0.5 * (a + c) - std::sqrt(h * h + std::norm(m(0, 1)));
  } else {
    Eigen::SelfAdjointEigenSolver<Mat<D>> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
}

template <int D>
double spec_norm_herm(const Mat<D>& m) {
  if constexpr (D == 1) {
    return std::abs(m(0, 0).real());
  } else if constexpr (D == 2) {
    const double a = m(0, 0).real(), c = m(1, 1).real();
    const double h = 0.5 * (a - c);
    return std::abs(0.5 * (a + c)) + std::sqrt(h * h + std::norm(m(0, 1)));
  } else {
    Eigen::SelfAdjointEigenSolver<Mat<D>> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
}

// Phase-space field of unnormalized d x d density matrices. rho_C = cellwise
// trace, rho_Q = integral over the grid. Invariants at rest: Hermitian to
// 1e-12, total trace 1 to 1e-8, cell spectra >= -1e-9. Positivity is
// monitored (positivity_report, step traces), never silently enforced.
template <int D>
struct HybridState {
  MatrixField<D> field;

  const PhaseGrid& grid() const { return field.grid; }

  double total_trace() const {
    const Mat<D> q = integrate(field);
    return q.trace().real();
  }

  void validate() const {
    if (!field.all_finite()) throw NonFiniteState("hybrid state has non-finite entries");
    const double hd = field.hermiticity_defect();
    if (hd > 1e-12)
      throw InvalidDensityMatrix("hybrid state not Hermitian, defect " + std::to_string(hd));
    const double tt = total_trace();
    if (std::abs(tt - 1.0) > 1e-8)
      throw InvalidDensityMatrix("hybrid state total trace " + std::to_string(tt));
  }
};

namespace detail {

template <int D>
void require_density_matrix(const Mat<D>& rho) {
  if (!rho.allFinite()) throw InvalidDensityMatrix("non-finite entries");
  if (element_traits<Mat<D>>::herm_defect(rho) > 1e-12)
    throw InvalidDensityMatrix("not Hermitian");
  const cplx tr = rho.trace();
  if (std::abs(tr.real() - 1.0) > 1e-10 || std::abs(tr.imag()) > 1e-12)
    throw InvalidDensityMatrix("trace must be 1");
  if (min_eig_herm<D>(rho) < -1e-12)
    throw InvalidDensityMatrix("negative eigenvalue");
}

inline void require_distribution(const ScalarField& f) {
  for (double v : f.v) {
    if (!std::isfinite(v)) throw InvalidDistribution("non-finite entries");
    if (v < 0.0) throw InvalidDistribution("negative density");
  }
  const double mass = integrate(f);
  if (std::abs(mass - 1.0) > 1e-8)
    throw InvalidDistribution("must integrate to 1, got " + std::to_string(mass));
}

}  // namespace detail

// rho(x,p) = rho_Q * rho_C(x,p). Both factors are validated up front.
template <int D>
HybridState<D> product_state(const Mat<D>& rho_q, const ScalarField& rho_c) {
  detail::require_density_matrix<D>(rho_q);
  detail::require_distribution(rho_c);
  MatrixField<D> f(rho_c.grid);
  for (int c = 0; c < rho_c.grid.size(); ++c) f.v[c] = rho_c.v[c] * rho_q;
  return HybridState<D>{std::move(f)};
}

template <int D>
ScalarField classical_marginal(const HybridState<D>& s) {
  return trace_field(s.field);
}

template <int D>
Mat<D> quantum_marginal(const HybridState<D>& s) {
  return integrate(s.field);
}

// Normalized state conditioned on the cell (i, j). Cells carrying less than
// 1e-12 of the peak cell mass are treated as null events.
template <int D>
Mat<D> conditional_state(const HybridState<D>& s, int i, int j) {
  const PhaseGrid& g = s.grid();
  if (i < 0 || i >= g.n_x || j < 0 || j >= g.n_p)
    throw ValidationError("conditional_state: cell index out of range");
  double peak = 0.0;
  for (int c = 0; c < g.size(); ++c)
    peak = std::max(peak, std::abs(s.field.v[c].trace().real()));
  const Mat<D>& cell = s.field.at(i, j);
  const double mass = cell.trace().real();
  if (mass <= 1e-12 * peak)
    throw ConditionOnNullEvent("cell mass " + std::to_string(mass) +
                               " below threshold at (" + std::to_string(i) + "," +
                               std::to_string(j) + ")");
  Mat<D> out = cell / mass;
  return out;
}

struct PositivityReport {
  double min_eig = 0.0;
  int arg_i = 0, arg_j = 0;  // cell attaining min_eig
  int n_negative = 0;        // cells with min eigenvalue < -1e-12
};

template <int D>
PositivityReport positivity_report(const MatrixField<D>& f) {
  PositivityReport r;
  r.min_eig = std::numeric_limits<double>::infinity();
  for (int i = 0; i < f.grid.n_x; ++i)
    for (int j = 0; j < f.grid.n_p; ++j) {
      const double e = min_eig_herm<D>(f.at(i, j));
      if (e < r.min_eig) {
        r.min_eig = e;
        r.arg_i = i;
        r.arg_j = j;
      }
      if (e < -1e-12) ++r.n_negative;
    }
  return r;
}

template <int D>
PositivityReport positivity_report(const HybridState<D>& s) {
  return positivity_report(s.field);
}

}  // namespace hybridyn
