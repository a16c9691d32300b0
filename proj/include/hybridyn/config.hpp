#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hybridyn/errors.hpp"

// Flat dotted-key run configuration: one `key = value` per line, `#` starts
// a comment, blank lines ignored. Every key except `scenario` carries a
// documented default; resolution keeps the source of each value so run
// metadata can show the full effective configuration, defaults included.

namespace hybridyn {

struct KeyDef {
  const char* key;
  const char* fallback;
  const char* doc;
};

struct ScenarioDef {
  const char* name;
  const char* doc;
  std::vector<KeyDef> keys;  // canonical order; defaults are per scenario
};

inline const std::vector<ScenarioDef>& scenario_table() {
  static const std::vector<ScenarioDef> t = {
      {"hit-sample",
       "seeded ensemble of Gaussian pointer readouts on a two-branch superposition",
       {
           {"seed", "12345", "base RNG seed; draw k uses seed+k"},
           {"out", "hybridyn_out", "output directory (run --out overrides)"},
           {"grid1d.q_min", "-8", "left edge of the system grid"},
           {"grid1d.q_max", "8", "right edge of the system grid"},
           {"grid1d.n", "513", "nodes of the system grid"},
           {"hit.delta", "0.1", "pointer precision (rms of the pointer density)"},
           {"hit.n_runs", "100000", "number of independent seeded draws"},
           {"hit.w_plus", "0.7", "Born weight of the branch at +hit.center"},
           {"hit.center", "1", "branch packets sit at +-hit.center"},
           {"hit.var", "0.04", "variance of each branch packet"},
       }},
      {"hit-equivalence",
       "one-step hit versus the explicit entangle-project chain on random superpositions",
       {
           {"seed", "12345", "base RNG seed; state k uses seed+k"},
           {"out", "hybridyn_out", "output directory (run --out overrides)"},
           {"grid1d.q_min", "-10", "left edge of the system and pointer grids"},
           {"grid1d.q_max", "10", "right edge of the system and pointer grids"},
           {"grid1d.n", "641", "nodes of the system and pointer grids"},
           {"equiv.delta", "0.5", "pointer precision for both paths"},
           {"equiv.n_states", "10", "number of random superposition states"},
       }},
      {"hybrid-evolve",
       "spin-oscillator product state integrated under the chosen hybrid generator",
       {
           {"seed", "12345", "recorded for provenance; the flow is deterministic"},
           {"out", "hybridyn_out", "output directory (run --out overrides)"},
           {"grid.x_min", "-8", "left x edge of the phase-space grid"},
           {"grid.x_max", "8", "right x edge of the phase-space grid"},
           {"grid.p_min", "-8", "lower p edge of the phase-space grid"},
           {"grid.p_max", "8", "upper p edge of the phase-space grid"},
           {"grid.n_x", "128", "cells along x"},
           {"grid.n_p", "128", "cells along p"},
           {"evolve.generator", "corrected", "hybrid generator: naive | corrected"},
           {"evolve.scheme", "central2", "state-derivative scheme: central2 | spectral"},
           {"evolve.dt", "0.001", "RK4 step"},
           {"evolve.t_final", "1", "integration horizon; n_steps = round(t_final/dt)"},
           {"evolve.omega", "1", "level splitting: H_Q = (omega/2) sigma1"},
           {"evolve.lambda", "1", "coupling strength: H_INT = lambda x sigma3"},
           {"evolve.bloch_x", "0.4", "initial quantum Bloch vector, x component"},
           {"evolve.bloch_y", "0", "initial quantum Bloch vector, y component"},
           {"evolve.bloch_z", "0", "initial quantum Bloch vector, z component"},
           {"evolve.center_x", "0", "initial classical Gaussian center, x"},
           {"evolve.center_p", "0", "initial classical Gaussian center, p"},
           {"evolve.var", "1", "initial classical Gaussian variance per axis"},
           {"evolve.coarse_grain", "true", "smooth the initial state over unit cells"},
       }},
      {"positivity-probe",
       "pinned sharp-state fixture that drives the uncorrected generator negative",
       {
           {"seed", "12345", "recorded for provenance; the flow is deterministic"},
           {"out", "hybridyn_out", "output directory (run --out overrides)"},
           {"grid.x_min", "-8", "left x edge of the phase-space grid"},
           {"grid.x_max", "8", "right x edge of the phase-space grid"},
           {"grid.p_min", "-8", "lower p edge of the phase-space grid"},
           {"grid.p_max", "8", "upper p edge of the phase-space grid"},
           {"grid.n_x", "128", "cells along x"},
           {"grid.n_p", "128", "cells along p"},
           {"probe.generator", "naive", "hybrid generator: naive | corrected"},
           {"probe.lambda", "1", "coupling strength: H_INT = lambda x sigma1"},
           {"probe.var", "0.02", "variance of the sharp classical Gaussian"},
           {"probe.dt", "0.001", "RK4 step"},
           {"probe.t_final", "0.05", "integration horizon; n_steps = round(t_final/dt)"},
           {"probe.coarse_grain", "false", "smooth the initial state over unit cells"},
       }},
      {"stern-gerlach",
       "impulsive spin-pointer measurement: branch statistics and off-diagonal damping",
       {
           {"seed", "12345", "recorded for provenance; the impulse is deterministic"},
           {"out", "hybridyn_out", "output directory (run --out overrides)"},
           {"grid.x_min", "-8", "left x edge of the phase-space grid"},
           {"grid.x_max", "8", "right x edge of the phase-space grid"},
           {"grid.p_min", "-8", "lower p edge of the phase-space grid"},
           {"grid.p_max", "8", "upper p edge of the phase-space grid"},
           {"grid.n_x", "128", "cells along x"},
           {"grid.n_p", "128", "cells along p"},
           {"sg.g", "3", "impulse strength; pointer branches land at x = +-g"},
           {"sg.c_plus_re", "0.7071067811865476", "spin-up amplitude, real part"},
           {"sg.c_plus_im", "0", "spin-up amplitude, imaginary part"},
           {"sg.c_minus_re", "0.7071067811865476", "spin-down amplitude, real part"},
           {"sg.c_minus_im", "0", "spin-down amplitude, imaginary part"},
           {"sg.path", "analytic", "propagation path: analytic | numeric"},
           {"sg.n_substeps", "1", "numeric path: number of exact impulse factors"},
       }},
  };
  return t;
}

inline std::string scenario_name_list() {
  std::string names;
  for (const auto& s : scenario_table()) {
    if (!names.empty()) names += ", ";
    names += s.name;
  }
  return names;
}

inline const ScenarioDef& scenario_def(const std::string& name) {
  for (const auto& s : scenario_table())
    if (name == s.name) return s;
  throw ValidationError("unknown scenario '" + name +
                        "'; valid scenarios: " + scenario_name_list());
}

struct RunConfig {
  struct Entry {
    std::string key, value, source;  // source: config | default | cli
  };

  std::string scenario;
  std::vector<Entry> entries;

  const Entry* find(std::string_view key) const {
    for (const auto& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  }

  const std::string& raw(std::string_view key) const {
    const Entry* e = find(key);
    if (!e) throw ValidationError("internal: unresolved key '" + std::string(key) + "'");
    return e->value;
  }

  void set(std::string_view key, std::string value, std::string source) {
    for (auto& e : entries)
      if (e.key == key) {
        e.value = std::move(value);
        e.source = std::move(source);
        return;
      }
    throw ValidationError("internal: unresolved key '" + std::string(key) + "'");
  }

  double num(std::string_view key) const {
    const std::string& v = raw(key);
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(out))
      throw ValidationError(std::string(key) + " must be a finite number, got '" + v + "'");
    return out;
  }

  long long integer(std::string_view key) const {
    const std::string& v = raw(key);
    long long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
      throw ValidationError(std::string(key) + " must be an integer, got '" + v + "'");
    return out;
  }

  std::uint64_t u64(std::string_view key) const {
    const std::string& v = raw(key);
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
      throw ValidationError(std::string(key) +
                            " must be an unsigned 64-bit integer, got '" + v + "'");
    return out;
  }

  bool flag(std::string_view key) const {
    const std::string& v = raw(key);
    if (v == "true") return true;
    if (v == "false") return false;
    throw ValidationError(std::string(key) + " must be 'true' or 'false', got '" + v + "'");
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline void check_enum(const RunConfig& cfg, std::string_view key,
                       std::initializer_list<const char*> allowed) {
  const std::string& v = cfg.raw(key);
  std::string list;
  for (const char* a : allowed) {
    if (v == a) return;
    if (!list.empty()) list += " | ";
    list += a;
  }
  throw ValidationError(std::string(key) + " must be one of: " + list + "; got '" + v + "'");
}

inline void check_positive(const RunConfig& cfg, std::string_view key) {
  if (!(cfg.num(key) > 0.0))
    throw ValidationError(std::string(key) + " must be positive");
}

inline void check_grid1d(const RunConfig& cfg) {
  if (!(cfg.num("grid1d.q_max") > cfg.num("grid1d.q_min")))
    throw ValidationError("grid1d.q_max must exceed grid1d.q_min");
  if (cfg.integer("grid1d.n") < 8)
    throw ValidationError("grid1d.n must be at least 8");
}

inline void check_grid2d(const RunConfig& cfg) {
  if (!(cfg.num("grid.x_max") > cfg.num("grid.x_min")))
    throw ValidationError("grid.x_max must exceed grid.x_min");
  if (!(cfg.num("grid.p_max") > cfg.num("grid.p_min")))
    throw ValidationError("grid.p_max must exceed grid.p_min");
  if (cfg.integer("grid.n_x") < 8 || cfg.integer("grid.n_p") < 8)
    throw ValidationError("grid.n_x and grid.n_p must be at least 8");
}

inline void validate_config(const RunConfig& cfg) {
  cfg.u64("seed");
  if (cfg.raw("out").empty()) throw ValidationError("out must be a non-empty path");

  if (cfg.scenario == "hit-sample") {
    check_grid1d(cfg);
    check_positive(cfg, "hit.delta");
    if (cfg.integer("hit.n_runs") < 1)
      throw ValidationError("hit.n_runs must be at least 1");
    const double w = cfg.num("hit.w_plus");
    if (!(w >= 0.0 && w <= 1.0))
      throw ValidationError("hit.w_plus must lie in [0, 1]");
    check_positive(cfg, "hit.center");
    check_positive(cfg, "hit.var");
  } else if (cfg.scenario == "hit-equivalence") {
    check_grid1d(cfg);
    check_positive(cfg, "equiv.delta");
    if (cfg.integer("equiv.n_states") < 1)
      throw ValidationError("equiv.n_states must be at least 1");
  } else if (cfg.scenario == "hybrid-evolve") {
    check_grid2d(cfg);
    check_enum(cfg, "evolve.generator", {"naive", "corrected"});
    check_enum(cfg, "evolve.scheme", {"central2", "spectral"});
    check_positive(cfg, "evolve.dt");
    check_positive(cfg, "evolve.t_final");
    cfg.num("evolve.omega");
    cfg.num("evolve.lambda");
    cfg.num("evolve.center_x");
    cfg.num("evolve.center_p");
    check_positive(cfg, "evolve.var");
    const double bx = cfg.num("evolve.bloch_x"), by = cfg.num("evolve.bloch_y"),
                 bz = cfg.num("evolve.bloch_z");
    if (bx * bx + by * by + bz * bz > 1.0 + 1e-12)
      throw ValidationError("evolve.bloch_x/_y/_z must have norm at most 1");
    cfg.flag("evolve.coarse_grain");
  } else if (cfg.scenario == "positivity-probe") {
    check_grid2d(cfg);
    check_enum(cfg, "probe.generator", {"naive", "corrected"});
    cfg.num("probe.lambda");
    check_positive(cfg, "probe.var");
    check_positive(cfg, "probe.dt");
    check_positive(cfg, "probe.t_final");
    cfg.flag("probe.coarse_grain");
  } else if (cfg.scenario == "stern-gerlach") {
    check_grid2d(cfg);
    if (!(cfg.num("sg.g") > 0.0)) throw ValidationError("sg.g must be positive");
    check_enum(cfg, "sg.path", {"analytic", "numeric"});
    if (cfg.integer("sg.n_substeps") < 1)
      throw ValidationError("sg.n_substeps must be at least 1");
    const double pr = cfg.num("sg.c_plus_re"), pi = cfg.num("sg.c_plus_im");
    const double mr = cfg.num("sg.c_minus_re"), mi = cfg.num("sg.c_minus_im");
    if (pr * pr + pi * pi + mr * mr + mi * mi < 1e-12)
      throw ValidationError("sg.c_plus and sg.c_minus must not both vanish");
  }
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> kv;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos
                                                                : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (const size_t h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;

    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value', got '" + line + "'", line_no);
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (value.empty()) throw ParseError("empty value for '" + key + "'", line_no);
    for (const char c : key)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
        throw ParseError("malformed key '" + key + "'", line_no);
    for (const auto& [k, v] : kv)
      if (k == key) throw ParseError("duplicate key '" + key + "'", line_no);
    kv.emplace_back(key, value);
  }

  std::string scen;
  for (const auto& [k, v] : kv)
    if (k == "scenario") scen = v;
  if (scen.empty())
    throw ValidationError("config must set scenario = <name>; valid scenarios: " +
                          scenario_name_list());
  const ScenarioDef& def = scenario_def(scen);

  for (const auto& [k, v] : kv) {
    if (k == "scenario") continue;
    bool known = false;
    for (const KeyDef& kd : def.keys)
      if (k == kd.key) {
        known = true;
        break;
      }
    if (!known) {
      std::string valid;
      for (const KeyDef& kd : def.keys) {
        if (!valid.empty()) valid += ", ";
        valid += kd.key;
      }
      throw ValidationError("unknown key '" + k + "' for scenario " + scen +
                            "; valid keys: " + valid);
    }
  }

  RunConfig cfg;
  cfg.scenario = scen;
  for (const KeyDef& kd : def.keys) {
    const std::string* from_file = nullptr;
    for (const auto& [k, v] : kv)
      if (k == kd.key) from_file = &v;
    cfg.entries.push_back(from_file
                              ? RunConfig::Entry{kd.key, *from_file, "config"}
                              : RunConfig::Entry{kd.key, kd.fallback, "default"});
  }

  detail::validate_config(cfg);
  return cfg;
}

}  // namespace hybridyn
