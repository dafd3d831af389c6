#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qgibbs/harness.hpp"

using namespace qgibbs;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void summarize(const std::vector<Record>& records, std::ostream& os) {
  int failed = 0;
  for (const auto& r : records) {
    os << (r.passed() ? "PASS " : "FAIL ") << r.id << " (" << r.kind << ")";
    for (const auto& [k, v] : r.checks)
      if (!v) os << " " << k;
    os << "\n";
    failed += !r.passed();
  }
  os << records.size() - failed << "/" << records.size() << " experiments passed\n";
}

int finish(const std::vector<Record>& records, const std::string& out, bool quiet) {
  if (!out.empty()) write_outputs(records, out);
  else std::cout << emit_jsonl(records);
  if (!quiet) summarize(records, std::cerr);
  return exit_code(records);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Gibbs-sampler experiments"};
  app.require_subcommand(1);
  std::string out;
  bool quiet = false;
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto* run_cmd = app.add_subcommand("run", "run every experiment of a JSON config");
  std::string config_path;
  run_cmd->add_option("-c,--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--out", out, "output prefix; writes <prefix>.jsonl and <prefix>.csv (stdout JSONL if absent)");
  run_cmd->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) { seed_set = true; });
  run_cmd->add_flag("-q,--quiet", quiet, "no summary on stderr");

  // one subcommand per experiment kind, running that kind alone with its default parameters
  ModelConfig model;
  std::string params_text = "{}";
  std::vector<std::string> checks;
  std::vector<CLI::App*> kind_cmds;
  for (const auto& kind : experiment_kinds()) {
    auto* sc = app.add_subcommand(kind, "run the '" + kind + "' checks");
    sc->add_option("--L", model.L, "linear size of the model");
    sc->add_option("--dim", model.dim, "lattice dimension (1 or 2)");
    sc->add_option("--J", model.J, "ZZ coupling");
    sc->add_option("--hz", model.hz, "longitudinal field");
    sc->add_option("--beta", model.beta, "inverse temperature");
    sc->add_option("--checks", checks, "subset of checks")->check(CLI::IsMember(kind_checks(kind)));
    sc->add_option("--params", params_text, "extra parameters as a JSON object");
    sc->add_option("--seed", seed, "seed")->each([&](const std::string&) { seed_set = true; });
    sc->add_option("-o,--out", out, "output prefix");
    sc->add_flag("-q,--quiet", quiet, "no summary on stderr");
    kind_cmds.push_back(sc);
  }

  auto* report_cmd = app.add_subcommand("report", "summarize a JSONL result file and write it as CSV");
  std::string in_path, csv_path;
  report_cmd->add_option("input", in_path, "JSONL records")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--csv", csv_path, "CSV destination (stdout if absent)");
  std::string table_path;
  report_cmd->add_option("--decay-table", table_path, "write the distance/value decay series here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*run_cmd) {
      ExperimentConfig c = load_config(config_path);
      if (seed_set) c.seed = seed;
      if (out.empty()) out = c.output;
      return finish(run(c, quiet ? nullptr : &std::cerr), out, quiet);
    }
    if (*report_cmd) {
      auto records = parse_jsonl(slurp(in_path));
      std::string csv = emit_csv(records);
      if (csv_path.empty()) {
        std::cout << csv;
      } else {
        std::ofstream f(csv_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + csv_path + "'");
        f << csv;
      }
      if (!table_path.empty()) {
        std::ofstream t(table_path, std::ios::binary);
        if (!t) throw std::runtime_error("cannot write '" + table_path + "'");
        t << emit_decay_table(records);
      }
      summarize(records, std::cerr);
      return exit_code(records);
    }
    for (auto* sc : kind_cmds) {
      if (!*sc) continue;
      nlohmann::json e = nlohmann::json::parse(params_text);
      if (!e.is_object()) throw SchemaError("--params must be a JSON object");
      e["id"] = sc->get_name();
      e["kind"] = sc->get_name();
      if (!checks.empty()) e["checks"] = checks;
      nlohmann::json cfg = {{"model",
                             {{"family", model.family},
                              {"dim", model.dim},
                              {"L", model.L},
                              {"J", model.J},
                              {"hz", model.hz},
                              {"beta", model.beta}}},
                            {"experiments", nlohmann::json::array({e})}};
      if (seed_set) cfg["seed"] = seed;
      return finish(run(parse_config(cfg), quiet ? nullptr : &std::cerr), out, quiet);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
