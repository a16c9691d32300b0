#pragma once

#include <Eigen/Eigenvalues>

#include "hybridyn/field_ops.hpp"

// Gaussian coarse-graining over unit phase-space cells. The smoothing kernel
// is exp(-(xi^2 + eta^2)) normalized to unit mass on the grid, i.e. variance
// 1/2 per axis; convolving a state with it is what turns a formal hybrid
// density into one whose positivity the corrected dynamics protects.

namespace hybridyn {

namespace detail {

// 1-d kernel taps exp(-(m*h)^2) out to where they underflow the accumulation
// (beyond |xi| ~ 5.9 the tap is < 1e-15 and cannot move any invariant at the
// tested tolerances).
inline std::vector<double> kernel_taps(double h) {
  const double reach = 5.9;
  const int M = static_cast<int>(std::floor(reach / h));
  std::vector<double> w(2 * M + 1);
  for (int m = -M; m <= M; ++m) w[m + M] = std::exp(-(m * h) * (m * h));
  return w;
}

// Convolve every lattice line along one axis. Near the boundary the kernel
// is truncated to the cells that exist and renormalized per SOURCE cell, so
// every cell's mass is redistributed on-grid with total weight exactly one
// and the smoothing conserves the integral for any input. In the interior
// the per-source norm is the constant full tap sum. Because the 2-d kernel
// is a product and the valid region near any corner is a product of
// intervals, doing this per axis equals the 2-d rule.
template <class T>
void smooth_axis(const Field<T>& in, Field<T>& out, int axis) {
  const int n = (axis == 0) ? in.grid.n_x : in.grid.n_p;
  const int nlines = (axis == 0) ? in.grid.n_p : in.grid.n_x;
  const int stride = (axis == 0) ? in.grid.n_p : 1;
  const double h = (axis == 0) ? in.grid.dx() : in.grid.dp();
  const std::vector<double> w = kernel_taps(h);
  const int M = (static_cast<int>(w.size()) - 1) / 2;

  // inverse of the on-grid tap mass of source cell s; same for every line
  std::vector<double> invnorm(n);
  for (int s = 0; s < n; ++s) {
    const int lo = std::max(-M, -s), hi = std::min(M, n - 1 - s);
    double norm = 0.0;
    for (int m = lo; m <= hi; ++m) norm += w[m + M];
    invnorm[s] = 1.0 / norm;
  }

  std::vector<T> scaled(n);
  for (int line = 0; line < nlines; ++line) {
    const long base = (axis == 0) ? line : static_cast<long>(line) * in.grid.n_p;
    const T* src = &in.v[base];
    T* dst = &out.v[base];
    for (int s = 0; s < n; ++s)
      scaled[s] = invnorm[s] * src[s * static_cast<long>(stride)];
    for (int i = 0; i < n; ++i) {
      const int lo = std::max(-M, -i), hi = std::min(M, n - 1 - i);
      T acc = element_traits<T>::zero();
      for (int m = lo; m <= hi; ++m) acc += w[m + M] * scaled[i + m];
      dst[i * static_cast<long>(stride)] = acc;
    }
  }
}

inline double trace_norm_herm(double v) { return std::abs(v); }

template <int D>
double trace_norm_herm(const Mat<D>& m) {
  Eigen::SelfAdjointEigenSolver<Mat<D>> es((m + m.adjoint()) * 0.5,
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

inline double trace_real(double v) { return v; }

template <int D>
double trace_real(const Mat<D>& m) { return m.trace().real(); }

}  // namespace detail

template <class T>
Field<T> coarse_grain(const Field<T>& f) {
  if (f.grid.dx() > 1.0 || f.grid.dp() > 1.0)
    throw KernelUnderresolved("grid spacing exceeds the unit-cell kernel width");
  Field<T> tmp(f.grid), out(f.grid);
  detail::smooth_axis(f, tmp, 0);
  detail::smooth_axis(tmp, out, 1);
  out.hermitian = f.hermitian;  // convex real combination of cells
  return out;
}

struct Admissibility {
  double distance = 0.0;
  bool admissible = false;
};

// How far f is from its own coarse-graining, relative to the largest cell
// mass. States that change appreciably under smoothing carry sub-cell
// structure the corrected generator makes no positivity promise for.
template <class T>
Admissibility admissibility_check(const Field<T>& f, double tol = 0.5) {
  const Field<T> cg = coarse_grain(f);
  double num = 0.0, den = 0.0;
  for (int c = 0; c < f.grid.size(); ++c) {
    num = std::max(num, detail::trace_norm_herm(T(f.v[c] - cg.v[c])));
    den = std::max(den, std::abs(detail::trace_real(f.v[c])));
  }
  Admissibility a;
  a.distance = (den > 0.0) ? num / den : 0.0;
  a.admissible = a.distance <= tol;
  return a;
}

}  // namespace hybridyn
