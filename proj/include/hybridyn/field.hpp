#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "hybridyn/grid.hpp"

namespace hybridyn {

using cplx = std::complex<double>;

template <int D>
using Mat = Eigen::Matrix<cplx, D, D>;

// Per-element-type glue so the field operations below can be written once
// for real scalars and for small complex matrices.
template <class T>
struct element_traits;

template <>
struct element_traits<double> {
  static constexpr int dim = 1;
  static double zero() { return 0.0; }
  static double adjoint(double v) { return v; }
  static double trace(double v) { return v; }
  static bool finite(double v) { return std::isfinite(v); }
  static double max_abs(double v) { return std::abs(v); }
  // scalars are their own adjoints, so the defect is identically zero
  static double herm_defect(double) { return 0.0; }
};

template <int D>
struct element_traits<Mat<D>> {
  static constexpr int dim = D;
  static Mat<D> zero() { return Mat<D>::Zero(); }
  static Mat<D> adjoint(const Mat<D>& m) { return m.adjoint(); }
  static cplx trace(const Mat<D>& m) { return m.trace(); }
  static bool finite(const Mat<D>& m) { return m.allFinite(); }
  static double max_abs(const Mat<D>& m) { return m.cwiseAbs().maxCoeff(); }
  static double herm_defect(const Mat<D>& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
  }
};

// A value per grid cell, stored row-major over x (PhaseGrid::idx order).
// `hermitian` is advisory: set by constructors and the operations that
// provably preserve it, cleared otherwise; hermiticity_defect() measures
// the truth.
template <class T>
struct Field {
  PhaseGrid grid;
  std::vector<T> v;
  bool hermitian = true;

  Field() = default;
  explicit Field(const PhaseGrid& g) : grid(g) {
    grid.validate();
    v.assign(grid.size(), element_traits<T>::zero());
  }

  T& at(int i, int j) { return v[grid.idx(i, j)]; }
  const T& at(int i, int j) const { return v[grid.idx(i, j)]; }

  bool all_finite() const {
    for (const T& e : v)
      if (!element_traits<T>::finite(e)) return false;
    return true;
  }

  double hermiticity_defect() const {
    double d = 0.0;
    for (const T& e : v) d = std::max(d, element_traits<T>::herm_defect(e));
    return d;
  }

  double max_abs() const {
    double d = 0.0;
    for (const T& e : v) d = std::max(d, element_traits<T>::max_abs(e));
    return d;
  }
};

using ScalarField = Field<double>;

template <int D>
using MatrixField = Field<Mat<D>>;

namespace detail {
inline void require_same_grid(const PhaseGrid& a, const PhaseGrid& b) {
  if (!(a == b)) throw GridMismatch("fields live on different grids");
}
}  // namespace detail

// Promote a scalar field to s * identity, the convention used whenever a
// classical quantity enters a matrix-valued expression.
template <int D>
MatrixField<D> promote(const ScalarField& s) {
  MatrixField<D> out(s.grid);
  for (int c = 0; c < s.grid.size(); ++c)
    out.v[c] = s.v[c] * Mat<D>::Identity();
  out.hermitian = true;
  return out;
}

// Cellwise real trace. For Hermitian input the imaginary part is rounding
// noise; it is dropped.
template <int D>
ScalarField trace_field(const MatrixField<D>& f) {
  ScalarField out(f.grid);
  for (int c = 0; c < f.grid.size(); ++c) out.v[c] = f.v[c].trace().real();
  return out;
}

}  // namespace hybridyn
