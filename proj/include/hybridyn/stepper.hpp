#pragma once

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "hybridyn/generators.hpp"
#include "hybridyn/io.hpp"

namespace hybridyn {

enum class Generator { naive, corrected };

struct StepOptions {
  double dt = 1e-3;
  int n_steps = 1;
  Generator generator = Generator::corrected;
  Deriv scheme = Deriv::central2;
  double t0 = 0.0;
  // check the coarse-graining distance every k steps (0 = never)
  int admissibility_every = 0;
};

struct PositivityRow {
  double t;
  double min_eig;
  double total_trace;  // before the per-step renormalization
};

struct PositivityTrace {
  std::vector<PositivityRow> rows;
  double max_trace_drift = 0.0;  // max |total_trace - 1| seen in one step
  std::vector<std::pair<double, double>> admissibility;  // (t, distance)

  double min_eig() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) m = std::min(m, r.min_eig);
    return m;
  }
};

inline void write_positivity_csv(const std::string& path, const PositivityTrace& tr) {
  auto out = open_out(path);
  out << "t,min_eig,total_trace\n";
  for (const auto& r : tr.rows)
    out << fmt17(r.t) << ',' << fmt17(r.min_eig) << ','
        << fmt17(r.total_trace) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

template <int D>
struct EvolveResult {
  HybridState<D> state;
  PositivityTrace trace;
};

// Classical RK4 on the chosen generator. The total trace is conserved by the
// generator up to quadrature rounding; each step renormalizes it and records
// the drift, which staying below 1e-8 is part of the integrator contract.
// Positivity is recorded per step, never projected.
template <int D>
EvolveResult<D> step(const HybridState<D>& s0, const HybridHamiltonian<D>& H,
                     const StepOptions& opt) {
  if (!(opt.dt > 0.0) || opt.n_steps < 0) throw ValidationError("step: bad dt or n_steps");
  detail::require_same_grid(s0.field.grid, H.h_int.grid);
  const HamTerms<D> T(H);
  const PhaseGrid& g = s0.grid();
  const double hmin = std::min(g.dx(), g.dp());
  if (T.vmax > 0.0 && opt.dt > 0.25 * hmin / T.vmax)
    throw StepTooLarge("dt " + std::to_string(opt.dt) + " exceeds transport bound " +
                       std::to_string(0.25 * hmin / T.vmax));
  const bool corr = opt.generator == Generator::corrected;

  MatrixField<D> rho = s0.field;
  PositivityTrace tr;
  tr.rows.push_back({opt.t0, positivity_report(rho).min_eig,
                     integrate(rho).trace().real()});
  if (opt.admissibility_every > 0)
    tr.admissibility.emplace_back(opt.t0, admissibility_check(rho).distance);

  const double dt = opt.dt;
  MatrixField<D> tmp(g);
  for (int n = 1; n <= opt.n_steps; ++n) {
    const MatrixField<D> k1 = detail::hybrid_rhs(T, rho, opt.scheme, corr);
    tmp = lin(1.0, rho, 0.5 * dt, k1);
    const MatrixField<D> k2 = detail::hybrid_rhs(T, tmp, opt.scheme, corr);
    tmp = lin(1.0, rho, 0.5 * dt, k2);
    const MatrixField<D> k3 = detail::hybrid_rhs(T, tmp, opt.scheme, corr);
    tmp = lin(1.0, rho, dt, k3);
    const MatrixField<D> k4 = detail::hybrid_rhs(T, tmp, opt.scheme, corr);
    axpy(rho, dt / 6.0, k1);
    axpy(rho, dt / 3.0, k2);
    axpy(rho, dt / 3.0, k3);
    axpy(rho, dt / 6.0, k4);

    if (!rho.all_finite()) throw NonFiniteState("non-finite state at step " + std::to_string(n));
    const double tt = integrate(rho).trace().real();
    if (!std::isfinite(tt) || tt <= 0.0)
      throw NonFiniteState("total trace " + std::to_string(tt) + " at step " + std::to_string(n));
    tr.max_trace_drift = std::max(tr.max_trace_drift, std::abs(tt - 1.0));
    scale(rho, 1.0 / tt);

    const double t = opt.t0 + n * dt;
    tr.rows.push_back({t, positivity_report(rho).min_eig, tt});
    if (opt.admissibility_every > 0 && n % opt.admissibility_every == 0)
      tr.admissibility.emplace_back(t, admissibility_check(rho).distance);
  }
  return {HybridState<D>{std::move(rho)}, std::move(tr)};
}

}  // namespace hybridyn
