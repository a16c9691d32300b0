#pragma once

#include <algorithm>
#include <cmath>

#include "hybridyn/field.hpp"

// Finite-difference and spectral calculus on phase-space fields, the Poisson
// bracket, and grid quadrature. Summation order is fixed (row-major over x)
// everywhere so results do not depend on how work might be scheduled.

namespace hybridyn {

enum class Deriv {
  central2,  // 2nd order central, one-sided 2nd order at the boundary rows
  spectral   // FFT derivative; needs power-of-2 axis and decayed boundaries
};

namespace detail {

// Scalar-component access, so the FFT path can treat a matrix field as
// D*D independent complex lattices.
template <class T>
struct comps;

template <>
struct comps<double> {
  static constexpr int count = 1;
  static cplx get(const double& v, int) { return cplx(v, 0.0); }
  static void set(double& v, int, cplx z) { v = z.real(); }
};

template <int D>
struct comps<Mat<D>> {
  static constexpr int count = D * D;
  static cplx get(const Mat<D>& m, int k) { return m(k / D, k % D); }
  static void set(Mat<D>& m, int k, cplx z) { m(k / D, k % D) = z; }
};

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 transform. Grid sizes are small (<= a few
// hundred), so the O(n log n) constant and the serially accumulated
// twiddles are fine, and the result is bit-reproducible.
inline void fft_pow2(std::vector<cplx>& a, bool inverse) {
  const int n = static_cast<int>(a.size());
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / len;
    const cplx wl = std::polar(1.0, ang);
    for (int i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (int k = 0; k < len / 2; ++k) {
        const cplx u = a[i + k];
        const cplx t = a[i + k + len / 2] * w;
        a[i + k] = u + t;
        a[i + k + len / 2] = u - t;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double s = 1.0 / n;
    for (auto& z : a) z *= s;
  }
}

// d/du along one axis of the lattice. n points, stride apart, spacing h.
template <class T>
void central2_line(const T* in, T* out, int n, int stride, double h) {
  const double inv2h = 1.0 / (2.0 * h);
  // one-sided second-order stencils at the edges
  out[0] = (-3.0 * in[0] + 4.0 * in[stride] - in[2 * stride]) * inv2h;
  out[(n - 1) * static_cast<long>(stride)] =
      (3.0 * in[(n - 1) * static_cast<long>(stride)] -
       4.0 * in[(n - 2) * static_cast<long>(stride)] +
       in[(n - 3) * static_cast<long>(stride)]) *
      inv2h;
  for (int m = 1; m < n - 1; ++m)
    out[m * static_cast<long>(stride)] =
        (in[(m + 1) * static_cast<long>(stride)] -
         in[(m - 1) * static_cast<long>(stride)]) *
        inv2h;
}

template <class T>
void spectral_line(const T* in, T* out, int n, int stride, double length) {
  std::vector<cplx> buf(n);
  for (int comp = 0; comp < comps<T>::count; ++comp) {
    for (int m = 0; m < n; ++m) buf[m] = comps<T>::get(in[m * static_cast<long>(stride)], comp);
    fft_pow2(buf, false);
    for (int m = 0; m < n; ++m) {
      const int s = (m < n / 2) ? m : m - n;  // signed mode number
      // Nyquist derivative is ambiguous for real data; drop it
      const double k = (m == n / 2) ? 0.0 : 2.0 * M_PI * s / length;
      buf[m] *= cplx(0.0, k);
    }
    fft_pow2(buf, true);
    for (int m = 0; m < n; ++m) comps<T>::set(out[m * static_cast<long>(stride)], comp, buf[m]);
  }
}

}  // namespace detail

template <class T>
Field<T> partial_x(const Field<T>& f, Deriv scheme = Deriv::central2) {
  Field<T> out(f.grid);
  const int nx = f.grid.n_x, np = f.grid.n_p;
  if (scheme == Deriv::spectral && !detail::is_pow2(nx))
    throw ValidationError("spectral derivative needs a power-of-2 axis");
  for (int j = 0; j < np; ++j) {
    const T* in = &f.v[f.grid.idx(0, j)];
    T* o = &out.v[out.grid.idx(0, j)];
    if (scheme == Deriv::central2)
      detail::central2_line(in, o, nx, np, f.grid.dx());
    else
      detail::spectral_line(in, o, nx, np, f.grid.x_max - f.grid.x_min);
  }
  out.hermitian = f.hermitian;  // differencing is a real-linear combination
  return out;
}

template <class T>
Field<T> partial_p(const Field<T>& f, Deriv scheme = Deriv::central2) {
  Field<T> out(f.grid);
  const int nx = f.grid.n_x, np = f.grid.n_p;
  if (scheme == Deriv::spectral && !detail::is_pow2(np))
    throw ValidationError("spectral derivative needs a power-of-2 axis");
  for (int i = 0; i < nx; ++i) {
    const T* in = &f.v[f.grid.idx(i, 0)];
    T* o = &out.v[out.grid.idx(i, 0)];
    if (scheme == Deriv::central2)
      detail::central2_line(in, o, np, 1, f.grid.dp());
    else
      detail::spectral_line(in, o, np, 1, f.grid.p_max - f.grid.p_min);
  }
  out.hermitian = f.hermitian;
  return out;
}

// {A,B} = dA/dx dB/dp - dA/dp dB/dx, with matrix products taken in exactly
// this order. For matrix fields {A,B} != -{B,A} in general; only the scalar
// bracket is antisymmetric.
template <class T>
Field<T> poisson_bracket(const Field<T>& A, const Field<T>& B,
                         Deriv scheme = Deriv::central2) {
  detail::require_same_grid(A.grid, B.grid);
  Field<T> out(A.grid);
  const Field<T> Ax = partial_x(A, scheme), Ap = partial_p(A, scheme);
  const Field<T> Bx = partial_x(B, scheme), Bp = partial_p(B, scheme);
  for (int c = 0; c < out.grid.size(); ++c) out.v[c] = Ax.v[c] * Bp.v[c] - Ap.v[c] * Bx.v[c];
  // products of Hermitian factors need not be Hermitian
  out.hermitian = (element_traits<T>::dim == 1) && A.hermitian && B.hermitian;
  return out;
}

// Scalars entering a mixed bracket act as s * identity.
template <int D>
MatrixField<D> poisson_bracket(const ScalarField& A, const MatrixField<D>& B,
                               Deriv scheme = Deriv::central2) {
  return poisson_bracket(promote<D>(A), B, scheme);
}

template <int D>
MatrixField<D> poisson_bracket(const MatrixField<D>& A, const ScalarField& B,
                               Deriv scheme = Deriv::central2) {
  return poisson_bracket(A, promote<D>(B), scheme);
}

// Riemann sum over cell centers, fixed row-major order.
template <class T>
T integrate(const Field<T>& f) {
  T acc = element_traits<T>::zero();
  for (const T& e : f.v) acc += e;
  return acc * f.grid.cell_area();
}

// y += a*x
template <class T>
void axpy(Field<T>& y, double a, const Field<T>& x) {
  detail::require_same_grid(y.grid, x.grid);
  for (int c = 0; c < y.grid.size(); ++c) y.v[c] += a * x.v[c];
  y.hermitian = y.hermitian && x.hermitian;
}

template <class T>
Field<T> lin(double a, const Field<T>& x, double b, const Field<T>& y) {
  detail::require_same_grid(x.grid, y.grid);
  Field<T> out(x.grid);
  for (int c = 0; c < out.grid.size(); ++c) out.v[c] = a * x.v[c] + b * y.v[c];
  out.hermitian = x.hermitian && y.hermitian;
  return out;
}

template <class T>
void scale(Field<T>& f, double a) {
  for (T& e : f.v) e *= a;
}

}  // namespace hybridyn
