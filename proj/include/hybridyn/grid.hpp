#pragma once

#include <cmath>

#include "hybridyn/errors.hpp"

namespace hybridyn {

// Uniform cell-centered rectangle of phase space. Cell (i,j) sits at
// (x_min + (i+1/2)dx, p_min + (j+1/2)dp); all quadrature is the plain
// Riemann sum over cell centers times dx*dp.
struct PhaseGrid {
  double x_min = -8.0, x_max = 8.0;
  double p_min = -8.0, p_max = 8.0;
  int n_x = 128, n_p = 128;

  double dx() const { return (x_max - x_min) / n_x; }
  double dp() const { return (p_max - p_min) / n_p; }
  double x(int i) const { return x_min + (i + 0.5) * dx(); }
  double p(int j) const { return p_min + (j + 0.5) * dp(); }
  double cell_area() const { return dx() * dp(); }
  int size() const { return n_x * n_p; }
  // Row-major over x: index (i,j) -> i*n_p + j. Export and iteration order.
  int idx(int i, int j) const { return i * n_p + j; }

  bool operator==(const PhaseGrid&) const = default;

  void validate() const {
    if (!(x_max > x_min) || !(p_max > p_min))
      throw ValidationError("phase grid extents must be increasing");
    if (n_x < 8 || n_p < 8)
      throw ValidationError("phase grid needs at least 8 cells per axis");
  }
};

// Node-centered 1-d lattice for wavefunctions: q_i = q_min + i*dq with
// dq = (q_max-q_min)/(n-1), so both endpoints are nodes. Node centering
// makes shifts by whole multiples of dq land exactly on nodes, which the
// ancilla entanglement map exploits (its linear interpolation then incurs
// no error between commensurate grids).
struct Grid1D {
  double q_min = -8.0, q_max = 8.0;
  int n = 513;

  double dq() const { return (q_max - q_min) / (n - 1); }
  double q(int i) const { return q_min + i * dq(); }

  bool operator==(const Grid1D&) const = default;

  void validate() const {
    if (!(q_max > q_min)) throw ValidationError("grid extent must be increasing");
    if (n < 8) throw ValidationError("1-d grid needs at least 8 nodes");
  }
};

}  // namespace hybridyn
