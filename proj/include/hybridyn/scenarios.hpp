#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridyn/coarse_grain.hpp"
#include "hybridyn/collapse.hpp"
#include "hybridyn/config.hpp"
#include "hybridyn/io.hpp"
#include "hybridyn/mean_field.hpp"
#include "hybridyn/rng.hpp"
#include "hybridyn/stepper.hpp"
#include "hybridyn/stern_gerlach.hpp"

// Scenario runner behind the CLI. Each scenario writes its artifacts into
// the configured output directory, then the runner writes metadata.json
// describing the effective configuration and the artifact list. Everything
// except metadata.json (which carries a wall clock) is byte-deterministic
// for a fixed config: doubles go through fmt17 or the shortest-round-trip
// JSON dump, streams are binary, and all randomness is seed-derived.

namespace hybridyn {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  bool dump_elements = false;  // stern-gerlach: also write per-element CSVs
};

namespace detail {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline void write_json(const fs::path& path, const ordered_json& j) {
  std::ofstream os = open_out(path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failed: " + path.string());
}

inline PhaseGrid grid2d_from(const RunConfig& cfg) {
  PhaseGrid g{cfg.num("grid.x_min"), cfg.num("grid.x_max"),
              cfg.num("grid.p_min"), cfg.num("grid.p_max"),
              static_cast<int>(cfg.integer("grid.n_x")),
              static_cast<int>(cfg.integer("grid.n_p"))};
  g.validate();
  return g;
}

inline Grid1D grid1d_from(const RunConfig& cfg) {
  Grid1D g{cfg.num("grid1d.q_min"), cfg.num("grid1d.q_max"),
           static_cast<int>(cfg.integer("grid1d.n"))};
  g.validate();
  return g;
}

inline ordered_json grid2d_json(const PhaseGrid& g) {
  return {{"x_min", g.x_min}, {"x_max", g.x_max}, {"p_min", g.p_min},
          {"p_max", g.p_max}, {"n_x", g.n_x},     {"n_p", g.n_p}};
}

inline ordered_json grid1d_json(const Grid1D& g) {
  return {{"q_min", g.q_min}, {"q_max", g.q_max}, {"n", g.n}};
}

inline Mat<2> pauli(int k) {
  Mat<2> m = Mat<2>::Zero();
  if (k == 1) {
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
  } else if (k == 2) {
    m(0, 1) = cplx(0.0, -1.0);
    m(1, 0) = cplx(0.0, 1.0);
  } else {
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
  }
  return m;
}

inline ScalarField gaussian_density(const PhaseGrid& g, double cx, double cp,
                                    double var) {
  ScalarField f(g);
  for (int i = 0; i < g.n_x; ++i)
    for (int j = 0; j < g.n_p; ++j) {
      const double dxc = g.x(i) - cx, dpc = g.p(j) - cp;
      f.at(i, j) = std::exp(-(dxc * dxc + dpc * dpc) / (2.0 * var));
    }
  const double mass = integrate(f);
  if (!(mass > 0.0)) throw GridTooNarrow("classical Gaussian has no mass on the grid");
  for (double& v : f.v) v /= mass;
  return f;
}

inline ScalarField harmonic_potential(const PhaseGrid& g) {
  ScalarField f(g);
  for (int i = 0; i < g.n_x; ++i)
    for (int j = 0; j < g.n_p; ++j)
      f.at(i, j) = 0.5 * (g.x(i) * g.x(i) + g.p(j) * g.p(j));
  return f;
}

inline MatrixField<2> linear_coupling(const PhaseGrid& g, double lambda,
                                      const Mat<2>& m) {
  MatrixField<2> f(g);
  for (int i = 0; i < g.n_x; ++i)
    for (int j = 0; j < g.n_p; ++j)
      f.at(i, j) = (lambda * g.x(i)) * m;
  return f;
}

inline long long step_count(double t_final, double dt, const char* key) {
  const long long n = std::llround(t_final / dt);
  if (n < 1) throw ValidationError(std::string(key) + " must cover at least one step");
  return n;
}

inline void run_hit_sample(const RunConfig& cfg, const fs::path& dir,
                           std::vector<std::string>& artifacts, ordered_json& run) {
  const Grid1D g = grid1d_from(cfg);
  const double delta = cfg.num("hit.delta");
  const long long n_runs = cfg.integer("hit.n_runs");
  const double w_plus = cfg.num("hit.w_plus");
  const double center = cfg.num("hit.center");
  const double var = cfg.num("hit.var");
  const std::uint64_t seed = cfg.u64("seed");

  WaveFunction psi(g);
  const double amp = std::pow(2.0 * M_PI * var, -0.25);
  const double ap = std::sqrt(w_plus), am = std::sqrt(1.0 - w_plus);
  for (int i = 0; i < g.n; ++i) {
    const double q = g.q(i);
    psi.a[i] = ap * amp * std::exp(-(q - center) * (q - center) / (4.0 * var)) +
               am * amp * std::exp(-(q + center) * (q + center) / (4.0 * var));
  }
  psi.normalize();

  const OutcomeSampler sampler(psi, delta);
  std::ofstream os = open_out(dir / "samples.csv");
  os << "run,qbar,weight\n";
  long long plus = 0;
  for (long long k = 0; k < n_runs; ++k) {
    Rng rng(seed + static_cast<std::uint64_t>(k));
    const double qb = sampler.draw_qbar(rng);
    if (qb > 0.0) ++plus;
    os << k << ',' << fmt17(qb) << ',' << fmt17(sampler.pdf_at(qb)) << '\n';
  }
  if (!os) throw IoError("write failed: " + (dir / "samples.csv").string());
  artifacts.push_back("samples.csv");

  const double f_plus = static_cast<double>(plus) / static_cast<double>(n_runs);
  ordered_json summary;
  summary["n_runs"] = n_runs;
  summary["seed"] = seed;
  summary["delta"] = delta;
  summary["branch_frequencies"] = {{"plus", f_plus}, {"minus", 1.0 - f_plus}};
  write_json(dir / "summary.json", summary);
  artifacts.push_back("summary.json");

  run["grid"] = grid1d_json(g);
  run["state"] = "two Gaussian branches at +-hit.center";
  run["w_plus"] = w_plus;
  run["center"] = center;
  run["var"] = var;
}

inline void run_hit_equivalence(const RunConfig& cfg, const fs::path& dir,
                                std::vector<std::string>& artifacts,
                                ordered_json& run) {
  const Grid1D g = grid1d_from(cfg);
  const double delta = cfg.num("equiv.delta");
  const int n_states = static_cast<int>(cfg.integer("equiv.n_states"));
  const std::uint64_t seed = cfg.u64("seed");

  const WaveFunction pointer = ancilla_state(delta, g);
  std::ofstream os = open_out(dir / "equivalence.csv");
  os << "state,qbar,l2_distance\n";
  double max_l2 = 0.0;
  for (int s = 0; s < n_states; ++s) {
    Rng rng(seed + static_cast<std::uint64_t>(s));
    WaveFunction psi(g);
    for (int b = 0; b < 3; ++b) {
      const cplx amp(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
      const double mu = 5.0 * rng.uniform() - 2.5;
      const double sig = 0.3 + 0.9 * rng.uniform();
      const double k0 = 4.0 * rng.uniform() - 2.0;
      for (int i = 0; i < g.n; ++i) {
        const double q = g.q(i);
        psi.a[i] += amp * std::exp(-(q - mu) * (q - mu) / (4.0 * sig * sig)) *
                    std::exp(cplx(0.0, k0 * q));
      }
    }
    psi.normalize();

    // snap the drawn outcome to a pointer node; the explicit chain slices
    // the composite there exactly, anywhere else it interpolates
    const double draw = OutcomeSampler(psi, delta).draw_qbar(rng);
    const int node = std::clamp(
        static_cast<int>(std::lround((draw - g.q_min) / g.dq())), 0, g.n - 1);
    const double qbar = g.q(node);

    const HitResult direct = hit(psi, HitParams{delta, qbar});
    const ProjectedState chain = project_pointer(entangle(psi, pointer), qbar);
    double d2 = 0.0;
    for (int i = 0; i < g.n; ++i)
      d2 += std::norm(direct.state.a[i] - chain.state.a[i]);
    const double l2 = std::sqrt(d2 * g.dq());
    max_l2 = std::max(max_l2, l2);
    os << s << ',' << fmt17(qbar) << ',' << fmt17(l2) << '\n';
  }
  if (!os) throw IoError("write failed: " + (dir / "equivalence.csv").string());
  artifacts.push_back("equivalence.csv");

  ordered_json summary;
  summary["n_states"] = n_states;
  summary["seed"] = seed;
  summary["delta"] = delta;
  summary["max_l2"] = max_l2;
  write_json(dir / "summary.json", summary);
  artifacts.push_back("summary.json");

  run["grid"] = grid1d_json(g);
  run["state_family"] = "three random Gaussian packets with momentum kicks";
}

inline void run_hybrid_evolve(const RunConfig& cfg, const fs::path& dir,
                              std::vector<std::string>& artifacts,
                              ordered_json& run) {
  const PhaseGrid g = grid2d_from(cfg);
  const double dt = cfg.num("evolve.dt");
  const long long n_steps = step_count(cfg.num("evolve.t_final"), dt, "evolve.t_final");
  const double omega = cfg.num("evolve.omega");
  const double lambda = cfg.num("evolve.lambda");

  const double bx = cfg.num("evolve.bloch_x"), by = cfg.num("evolve.bloch_y"),
               bz = cfg.num("evolve.bloch_z");
  const Mat<2> rho_q = 0.5 * (Mat<2>::Identity() + bx * pauli(1) +
                              by * pauli(2) + bz * pauli(3));
  const ScalarField rho_c = gaussian_density(
      g, cfg.num("evolve.center_x"), cfg.num("evolve.center_p"), cfg.num("evolve.var"));
  HybridState<2> s0 = product_state<2>(rho_q, rho_c);
  if (cfg.flag("evolve.coarse_grain")) s0 = HybridState<2>{coarse_grain(s0.field)};

  const HybridHamiltonian<2> H(0.5 * omega * pauli(1), harmonic_potential(g),
                               linear_coupling(g, lambda, pauli(3)));

  StepOptions opt;
  opt.dt = dt;
  opt.n_steps = static_cast<int>(n_steps);
  opt.generator = cfg.raw("evolve.generator") == "naive" ? Generator::naive
                                                         : Generator::corrected;
  opt.scheme = cfg.raw("evolve.scheme") == "spectral" ? Deriv::spectral
                                                      : Deriv::central2;
  opt.admissibility_every = static_cast<int>(std::max<long long>(1, n_steps / 4));

  write_scalar_field_csv(dir / "marginal_before.csv", classical_marginal(s0));
  artifacts.push_back("marginal_before.csv");

  const EvolveResult<2> res = step(s0, H, opt);

  write_scalar_field_csv(dir / "marginal_after.csv", classical_marginal(res.state));
  artifacts.push_back("marginal_after.csv");
  write_positivity_csv((dir / "positivity_trace.csv").string(), res.trace);
  artifacts.push_back("positivity_trace.csv");

  const double mfl1 = marginal_consistency_l1(H, res.state, opt.scheme);
  const PositivityReport rep = positivity_report(res.state);

  ordered_json adm = ordered_json::array();
  for (const auto& [t, dist] : res.trace.admissibility)
    adm.push_back({{"t", t}, {"distance", dist}});

  ordered_json summary;
  summary["generator"] = cfg.raw("evolve.generator");
  summary["scheme"] = cfg.raw("evolve.scheme");
  summary["dt"] = dt;
  summary["n_steps"] = n_steps;
  summary["t_final"] = static_cast<double>(n_steps) * dt;
  summary["min_eig"] = res.trace.min_eig();
  summary["final_min_eig"] = rep.min_eig;
  summary["n_negative_cells"] = rep.n_negative;
  summary["max_trace_drift"] = res.trace.max_trace_drift;
  summary["final_total_trace"] = res.state.total_trace();
  summary["marginal_consistency_l1"] = mfl1;
  summary["admissibility"] = adm;
  write_json(dir / "summary.json", summary);
  artifacts.push_back("summary.json");

  run["grid"] = grid2d_json(g);
  run["hamiltonian"] = {{"h_q", "0.5*omega*sigma1"},
                        {"omega", omega},
                        {"h_c", "0.5*(x^2+p^2)"},
                        {"h_int", "lambda*x*sigma3"},
                        {"lambda", lambda}};
  run["generator"] = cfg.raw("evolve.generator");
  run["scheme"] = cfg.raw("evolve.scheme");
  run["dt"] = dt;
  run["n_steps"] = n_steps;
}

inline void run_positivity_probe(const RunConfig& cfg, const fs::path& dir,
                                 std::vector<std::string>& artifacts,
                                 ordered_json& run) {
  const PhaseGrid g = grid2d_from(cfg);
  const double dt = cfg.num("probe.dt");
  const long long n_steps = step_count(cfg.num("probe.t_final"), dt, "probe.t_final");
  const double lambda = cfg.num("probe.lambda");

  Mat<2> up = Mat<2>::Zero();
  up(0, 0) = 1.0;
  const ScalarField rho_c = gaussian_density(g, 0.0, 0.0, cfg.num("probe.var"));
  HybridState<2> s0 = product_state<2>(up, rho_c);
  if (cfg.flag("probe.coarse_grain")) s0 = HybridState<2>{coarse_grain(s0.field)};

  const HybridHamiltonian<2> H(Mat<2>::Zero(), harmonic_potential(g),
                               linear_coupling(g, lambda, pauli(1)));

  StepOptions opt;
  opt.dt = dt;
  opt.n_steps = static_cast<int>(n_steps);
  opt.generator = cfg.raw("probe.generator") == "naive" ? Generator::naive
                                                        : Generator::corrected;

  const EvolveResult<2> res = step(s0, H, opt);

  write_positivity_csv((dir / "positivity_trace.csv").string(), res.trace);
  artifacts.push_back("positivity_trace.csv");

  double min_eig = std::numeric_limits<double>::infinity();
  double t_at_min = 0.0;
  for (const auto& r : res.trace.rows)
    if (r.min_eig < min_eig) {
      min_eig = r.min_eig;
      t_at_min = r.t;
    }
  const PositivityReport rep = positivity_report(res.state);

  ordered_json summary;
  summary["generator"] = cfg.raw("probe.generator");
  summary["dt"] = dt;
  summary["n_steps"] = n_steps;
  summary["t_final"] = static_cast<double>(n_steps) * dt;
  summary["min_eig"] = min_eig;
  summary["t_at_min"] = t_at_min;
  summary["n_negative_cells"] = rep.n_negative;
  summary["max_trace_drift"] = res.trace.max_trace_drift;
  write_json(dir / "summary.json", summary);
  artifacts.push_back("summary.json");

  run["grid"] = grid2d_json(g);
  run["hamiltonian"] = {{"h_q", "0"},
                        {"h_c", "0.5*(x^2+p^2)"},
                        {"h_int", "lambda*x*sigma1"},
                        {"lambda", lambda}};
  run["generator"] = cfg.raw("probe.generator");
  run["dt"] = dt;
  run["n_steps"] = n_steps;
  run["initial"] = "spin-up times a variance-" + cfg.raw("probe.var") + " Gaussian";
}

inline void run_stern_gerlach(const RunConfig& cfg, const RunOptions& ropt,
                              const fs::path& dir,
                              std::vector<std::string>& artifacts,
                              ordered_json& run) {
  const PhaseGrid g = grid2d_from(cfg);
  const SGParams par{cfg.num("sg.g")};
  par.validate();

  const cplx cp(cfg.num("sg.c_plus_re"), cfg.num("sg.c_plus_im"));
  const cplx cm(cfg.num("sg.c_minus_re"), cfg.num("sg.c_minus_im"));
  const double inv = 1.0 / std::sqrt(std::norm(cp) + std::norm(cm));
  SpinAmplitudes spin;
  spin.c_plus = cp * inv;
  spin.c_minus = cm * inv;
  spin.validate();

  const std::string path = cfg.raw("sg.path");
  const HybridState<2> initial = initial_state(spin, g);
  write_scalar_field_csv(dir / "marginal_before.csv", classical_marginal(initial));
  artifacts.push_back("marginal_before.csv");

  const HybridState<2> fin =
      path == "analytic"
          ? analytic_propagate(spin, par, g)
          : numeric_propagate(initial, par,
                              static_cast<int>(cfg.integer("sg.n_substeps")));

  write_scalar_field_csv(dir / "marginal_after.csv", classical_marginal(fin));
  artifacts.push_back("marginal_after.csv");

  if (ropt.dump_elements) {
    ScalarField e00(g), e11(g), e01r(g), e01i(g);
    for (int i = 0; i < g.n_x; ++i)
      for (int j = 0; j < g.n_p; ++j) {
        const Mat<2>& m = fin.field.at(i, j);
        e00.at(i, j) = m(0, 0).real();
        e11.at(i, j) = m(1, 1).real();
        e01r.at(i, j) = m(0, 1).real();
        e01i.at(i, j) = m(0, 1).imag();
      }
    write_scalar_field_csv(dir / "element_00.csv", e00);
    write_scalar_field_csv(dir / "element_01_re.csv", e01r);
    write_scalar_field_csv(dir / "element_01_im.csv", e01i);
    write_scalar_field_csv(dir / "element_11.csv", e11);
    artifacts.push_back("element_00.csv");
    artifacts.push_back("element_01_re.csv");
    artifacts.push_back("element_01_im.csv");
    artifacts.push_back("element_11.csv");
  }

  const SGReadout r = readout(fin, par);

  ordered_json summary;
  summary["g"] = par.g;
  summary["c_plus"] = {spin.c_plus.real(), spin.c_plus.imag()};
  summary["c_minus"] = {spin.c_minus.real(), spin.c_minus.imag()};
  summary["p_plus"] = r.p_plus;
  summary["p_minus"] = r.p_minus;
  summary["pointer_means"] = {{"plus", r.pointer_mean_plus},
                              {"minus", r.pointer_mean_minus}};
  summary["offdiag_norm"] = r.offdiag_norm;
  summary["path"] = path;
  write_json(dir / "summary.json", summary);
  artifacts.push_back("summary.json");

  run["grid"] = grid2d_json(g);
  run["pointer_precision"] = par.delta();
  run["offdiag_mass"] = r.offdiag_mass;
  if (path == "numeric") run["n_substeps"] = cfg.integer("sg.n_substeps");
  if (!par.desk_scale())
    run["warning"] = "g below 3: pointer separation under the desk scale";
}

}  // namespace detail

inline void run_scenario(const RunConfig& cfg, const RunOptions& opt = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  const std::filesystem::path dir = cfg.raw("out");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " +
                        ec.message());

  std::vector<std::string> artifacts;
  detail::ordered_json run_block;
  if (cfg.scenario == "hit-sample")
    detail::run_hit_sample(cfg, dir, artifacts, run_block);
  else if (cfg.scenario == "hit-equivalence")
    detail::run_hit_equivalence(cfg, dir, artifacts, run_block);
  else if (cfg.scenario == "hybrid-evolve")
    detail::run_hybrid_evolve(cfg, dir, artifacts, run_block);
  else if (cfg.scenario == "positivity-probe")
    detail::run_positivity_probe(cfg, dir, artifacts, run_block);
  else if (cfg.scenario == "stern-gerlach")
    detail::run_stern_gerlach(cfg, opt, dir, artifacts, run_block);
  else
    throw ValidationError("unknown scenario '" + cfg.scenario + "'");

  artifacts.push_back("metadata.json");
  detail::ordered_json md;
  md["scenario"] = cfg.scenario;
  md["seed"] = cfg.u64("seed");
  detail::ordered_json cj = detail::ordered_json::array();
  for (const auto& e : cfg.entries)
    cj.push_back({{"key", e.key}, {"value", e.value}, {"source", e.source}});
  md["config"] = cj;
  md["run"] = run_block;
  md["versions"] = {{"hybridyn", kVersion},
                    {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                  std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)}};
  md["artifacts"] = artifacts;
  md["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  detail::write_json(dir / "metadata.json", md);
}

}  // namespace hybridyn
