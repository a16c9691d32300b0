#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "hybridyn/errors.hpp"
#include "hybridyn/grid.hpp"

// 1-d wavefunctions on node-centered grids and the unitary pointer
// entanglement map. Quadrature is the plain Riemann sum times dq; states
// kept well inside the box make the endpoint weighting irrelevant.

namespace hybridyn {

using cplx = std::complex<double>;

struct WaveFunction {
  Grid1D grid;
  std::vector<cplx> a;  // amplitude per node

  WaveFunction() = default;
  explicit WaveFunction(const Grid1D& g) : grid(g) {
    grid.validate();
    a.assign(grid.n, cplx(0.0, 0.0));
  }

  double norm2() const {
    double s = 0.0;
    for (const cplx& z : a) s += std::norm(z);
    return s * grid.dq();
  }

  void normalize() {
    const double n2 = norm2();
    if (!(n2 > 1e-300) || !std::isfinite(n2))
      throw NumericalError("cannot normalize a null or non-finite wavefunction");
    const double s = 1.0 / std::sqrt(n2);
    for (cplx& z : a) z *= s;
  }
};

// position moments of |psi|^2; assume unit norm
inline double mean_q(const WaveFunction& psi) {
  double m = 0.0;
  for (int i = 0; i < psi.grid.n; ++i) m += psi.grid.q(i) * std::norm(psi.a[i]);
  return m * psi.grid.dq();
}

inline double var_q(const WaveFunction& psi) {
  const double mu = mean_q(psi);
  double v = 0.0;
  for (int i = 0; i < psi.grid.n; ++i) {
    const double d = psi.grid.q(i) - mu;
    v += d * d * std::norm(psi.a[i]);
  }
  return v * psi.grid.dq();
}

// real density over a 1-d coordinate (measurement outcome distributions)
struct ScalarDensity {
  Grid1D grid;
  std::vector<double> p;
};

inline double integrate(const ScalarDensity& d) {
  double s = 0.0;
  for (double v : d.p) s += v;
  return s * d.grid.dq();
}

// Pointer ready state: Gaussian centered at 0 whose position density has
// rms width delta (the detector precision). Renormalized on the grid.
inline WaveFunction ancilla_state(double delta, const Grid1D& grid) {
  if (!(delta > 0.0)) throw ValidationError("pointer precision must be positive");
  grid.validate();
  if (grid.q_min > -6.0 * delta || grid.q_max < 6.0 * delta)
    throw GridTooNarrow("pointer grid must span 6 precisions either side of 0");
  WaveFunction psi(grid);
  const double c = std::pow(2.0 * M_PI * delta * delta, -0.25);
  const double inv = 1.0 / (4.0 * delta * delta);
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.q(i);
    psi.a[i] = c * std::exp(-x * x * inv);
  }
  psi.normalize();
  return psi;
}

// psi evaluated off-node by linear interpolation; zero outside the grid
inline cplx sample_lerp(const WaveFunction& psi, double x) {
  const double t = (x - psi.grid.q_min) / psi.grid.dq();
  if (t < 0.0 || t > static_cast<double>(psi.grid.n - 1)) return cplx(0.0, 0.0);
  int k = static_cast<int>(t);
  if (k >= psi.grid.n - 1) k = psi.grid.n - 2;
  const double f = t - k;
  return (1.0 - f) * psi.a[k] + f * psi.a[k + 1];
}

// system coordinate q times pointer coordinate x_A, row-major over q
struct CompositeWaveFunction {
  Grid1D q;
  Grid1D xa;
  std::vector<cplx> a;
  double raw_norm2 = 0.0;  // squared norm before the final renormalization

  int idx(int i, int j) const { return i * xa.n + j; }

  double norm2() const {
    double s = 0.0;
    for (const cplx& z : a) s += std::norm(z);
    return s * q.dq() * xa.dq();
  }
};

// Impulsive system-pointer coupling in closed form: the ready pointer is
// shifted by the system coordinate, Phi(q, x_A) = psi_A(x_A - q) psi(q).
// The map is unitary; on the grid the interpolation leaves a
// discretization-level norm defect which is divided out (and recorded
// in raw_norm2).
inline CompositeWaveFunction entangle(const WaveFunction& psi,
                                      const WaveFunction& psi_a) {
  CompositeWaveFunction c;
  c.q = psi.grid;
  c.xa = psi_a.grid;
  c.a.assign(static_cast<size_t>(c.q.n) * c.xa.n, cplx(0.0, 0.0));
  for (int i = 0; i < c.q.n; ++i) {
    const double qi = c.q.q(i);
    const cplx si = psi.a[i];
    for (int j = 0; j < c.xa.n; ++j)
      c.a[c.idx(i, j)] = sample_lerp(psi_a, c.xa.q(j) - qi) * si;
  }
  c.raw_norm2 = c.norm2();
  if (!(c.raw_norm2 > 1e-300))
    throw NumericalError("entangled state has no norm; inputs were not normalized states");
  const double s = 1.0 / std::sqrt(c.raw_norm2);
  for (cplx& z : c.a) z *= s;
  return c;
}

}  // namespace hybridyn
