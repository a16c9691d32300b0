#pragma once

#include <algorithm>

#include "hybridyn/rng.hpp"
#include "hybridyn/wavefunction.hpp"

// The measurement chain and its one-step shortcut. A position readout with
// a Gaussian pointer of precision delta multiplies the wavefunction by a
// Gaussian window around the recorded outcome qbar and renormalizes; the
// pre-normalization squared norm N^2(qbar) is the outcome density, so it
// doubles as the Born weight of the record.

namespace hybridyn {

struct HitParams {
  double delta = 1.0;  // pointer precision (rms of the pointer density)
  double qbar = 0.0;   // recorded outcome

  void validate(const Grid1D& system) const {
    if (!(delta > 0.0)) throw ValidationError("pointer precision must be positive");
    if (qbar < system.q_min - 4.0 * delta || qbar > system.q_max + 4.0 * delta)
      throw ValidationError("outcome lies too far outside the system grid");
  }
};

struct ProjectedState {
  WaveFunction state;
  double norm = 0.0;  // N(qbar); squared it is the outcome density
};

struct HitResult {
  WaveFunction state;
  double weight = 0.0;  // N^2(qbar), the Born weight of this record
};

// Read the pointer at x_A = qbar: slice the composite between the two
// neighboring pointer columns. A slice with no support means the record
// qbar is impossible, not that the caller misused the grid.
inline ProjectedState project_pointer(const CompositeWaveFunction& phi,
                                      double qbar) {
  WaveFunction s(phi.q);
  const double t = (qbar - phi.xa.q_min) / phi.xa.dq();
  if (t >= 0.0 && t <= static_cast<double>(phi.xa.n - 1)) {
    int j = static_cast<int>(t);
    if (j >= phi.xa.n - 1) j = phi.xa.n - 2;
    const double f = t - j;
    for (int i = 0; i < phi.q.n; ++i)
      s.a[i] = (1.0 - f) * phi.a[phi.idx(i, j)] + f * phi.a[phi.idx(i, j + 1)];
  }  // else: outcome beyond the pointer range, slice identically zero
  const double n2 = s.norm2();
  if (n2 < 1e-300)
    throw ZeroProbabilityOutcome("no amplitude at this pointer reading");
  const double n = std::sqrt(n2);
  const double inv = 1.0 / n;
  for (cplx& z : s.a) z *= inv;
  return {s, n};
}

// One-step form of entangle + project_pointer.
inline HitResult hit(const WaveFunction& psi, const HitParams& hp) {
  hp.validate(psi.grid);
  WaveFunction s(psi.grid);
  const double c = std::pow(2.0 * M_PI * hp.delta * hp.delta, -0.25);
  const double inv4 = 1.0 / (4.0 * hp.delta * hp.delta);
  for (int i = 0; i < psi.grid.n; ++i) {
    const double d = hp.qbar - psi.grid.q(i);
    s.a[i] = psi.a[i] * (c * std::exp(-d * d * inv4));
  }
  const double w = s.norm2();
  if (w < 1e-300)
    throw ZeroProbabilityOutcome("no amplitude at this pointer reading");
  const double scale = 1.0 / std::sqrt(w);
  for (cplx& z : s.a) z *= scale;
  return {s, w};
}

// N^2(qbar) over a qbar-grid at the state's own resolution: the position
// density smeared with the pointer density of rms delta.
inline ScalarDensity outcome_pdf(const WaveFunction& psi, double delta) {
  if (!(delta > 0.0)) throw ValidationError("pointer precision must be positive");
  ScalarDensity d{psi.grid, std::vector<double>(psi.grid.n, 0.0)};
  const double c = 1.0 / (delta * std::sqrt(2.0 * M_PI));
  const double inv2 = 1.0 / (2.0 * delta * delta);
  const double dq = psi.grid.dq();
  for (int k = 0; k < psi.grid.n; ++k) {
    const double qb = psi.grid.q(k);
    double s = 0.0;
    for (int i = 0; i < psi.grid.n; ++i) {
      const double u = qb - psi.grid.q(i);
      s += std::norm(psi.a[i]) * std::exp(-u * u * inv2);
    }
    d.p[k] = s * c * dq;
  }
  return d;
}

struct OutcomeSample {
  double qbar = 0.0;
  WaveFunction post_state;
  double pdf_value = 0.0;  // N^2(qbar)
};

// Inverse-CDF sampler over the outcome density. The CDF is accumulated by
// trapezoids at the grid nodes and interpolated linearly in between, so a
// seed maps to an outcome deterministically with no rejection loop. Build
// once per state; draws are O(log n).
class OutcomeSampler {
 public:
  OutcomeSampler(const WaveFunction& psi, double delta)
      : psi_(psi), delta_(delta), pdf_(outcome_pdf(psi, delta)) {
    const int n = pdf_.grid.n;
    cdf_.assign(n, 0.0);
    const double dq = pdf_.grid.dq();
    for (int k = 1; k < n; ++k)
      cdf_[k] = cdf_[k - 1] + 0.5 * (pdf_.p[k - 1] + pdf_.p[k]) * dq;
    total_ = cdf_.back();
    if (!(total_ > 1e-300))
      throw NumericalError("outcome distribution has no mass");
  }

  double draw_qbar(Rng& rng) const {
    const double target = rng.uniform() * total_;
    int k = static_cast<int>(
        std::upper_bound(cdf_.begin(), cdf_.end(), target) - cdf_.begin());
    if (k < 1) k = 1;
    if (k > pdf_.grid.n - 1) k = pdf_.grid.n - 1;
    const double seg = cdf_[k] - cdf_[k - 1];
    const double f = (seg > 0.0) ? (target - cdf_[k - 1]) / seg : 0.5;
    return pdf_.grid.q(k - 1) + f * pdf_.grid.dq();
  }

  // exact outcome density at qbar (not the grid interpolant)
  double pdf_at(double qbar) const {
    const double c = 1.0 / (delta_ * std::sqrt(2.0 * M_PI));
    const double inv2 = 1.0 / (2.0 * delta_ * delta_);
    double s = 0.0;
    for (int i = 0; i < psi_.grid.n; ++i) {
      const double u = qbar - psi_.grid.q(i);
      s += std::norm(psi_.a[i]) * std::exp(-u * u * inv2);
    }
    return s * c * psi_.grid.dq();
  }

  OutcomeSample sample(Rng& rng) const {
    const double qb = draw_qbar(rng);
    HitResult h = hit(psi_, HitParams{delta_, qb});
    return {qb, h.state, h.weight};
  }

  const ScalarDensity& pdf() const { return pdf_; }

 private:
  WaveFunction psi_;
  double delta_;
  ScalarDensity pdf_;
  std::vector<double> cdf_;
  double total_ = 0.0;
};

inline OutcomeSample sample_outcome(const WaveFunction& psi, double delta,
                                    Rng& rng) {
  return OutcomeSampler(psi, delta).sample(rng);
}

inline OutcomeSample sample_outcome(const WaveFunction& psi, double delta,
                                    uint64_t seed) {
  Rng rng(seed);
  return sample_outcome(psi, delta, rng);
}

}  // namespace hybridyn
