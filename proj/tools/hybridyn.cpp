// Command line front end: `run` executes a scenario from a flat key = value
// config and writes its artifacts, `validate` prints the resolved
// configuration without running, `scenarios` lists what is available.
// Exit codes: 0 ok, 1 validation, 2 numerical, 3 I/O. Errors are one JSON
// line on stderr so harnesses can parse failures without scraping text.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hybridyn/config.hpp"
#include "hybridyn/scenarios.hpp"

namespace {

int fail(const char* kind, const std::string& what, int code) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["what"] = what;
  std::cerr << j.dump() << '\n';
  return code;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw hybridyn::IoError("cannot read config: " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

nlohmann::ordered_json resolved_json(const hybridyn::RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["scenario"] = cfg.scenario;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : cfg.entries)
    arr.push_back({{"key", e.key}, {"value", e.value}, {"source", e.source}});
  j["config"] = arr;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid quantum-classical dynamics scenarios"};
  app.require_subcommand(1);

  std::string run_config, run_out, run_seed;
  bool dump_elements = false;
  CLI::App* run = app.add_subcommand("run", "execute a scenario and write its artifacts");
  run->add_option("--config", run_config, "flat key = value config file")->required();
  run->add_option("--out", run_out, "output directory, overrides the config's out");
  run->add_option("--seed", run_seed, "unsigned 64-bit seed, overrides the config's seed");
  run->add_flag("--dump-elements", dump_elements,
                "stern-gerlach: also write per-element field CSVs");

  std::string val_config;
  CLI::App* val = app.add_subcommand("validate", "resolve a config and print it as JSON");
  val->add_option("--config", val_config, "flat key = value config file")->required();

  CLI::App* list = app.add_subcommand("scenarios", "list scenarios, keys and defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    return fail("validation", e.what(), 1);
  }

  try {
    if (list->parsed()) {
      for (const auto& s : hybridyn::scenario_table()) {
        std::cout << s.name << "\n  " << s.doc << "\n";
        for (const auto& k : s.keys)
          std::cout << "    " << k.key << " = " << k.fallback << "  # " << k.doc
                    << "\n";
      }
      return 0;
    }

    if (val->parsed()) {
      const hybridyn::RunConfig cfg = hybridyn::parse_config(read_file(val_config));
      std::cout << resolved_json(cfg).dump(2) << '\n';
      return 0;
    }

    hybridyn::RunConfig cfg = hybridyn::parse_config(read_file(run_config));
    if (!run_seed.empty()) {
      cfg.set("seed", run_seed, "cli");
      cfg.u64("seed");  // reject non-numeric overrides before running
    }
    if (!run_out.empty()) cfg.set("out", run_out, "cli");
    hybridyn::RunOptions opt;
    opt.dump_elements = dump_elements;
    hybridyn::run_scenario(cfg, opt);
    return 0;
  } catch (const hybridyn::ValidationError& e) {
    return fail("validation", e.what(), 1);
  } catch (const hybridyn::IoError& e) {
    return fail("io", e.what(), 3);
  } catch (const hybridyn::NumericalError& e) {
    return fail("numerical", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 2);
  }
}
