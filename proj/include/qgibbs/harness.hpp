#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgibbs/hamiltonians.hpp"
#include "qgibbs/lindbladians.hpp"

namespace qgibbs {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  std::string family = "ising";
  int dim = 1;
  int L = 3;
  double J = 1.0;
  double hz = 0.2;
  double beta = 0.1;
};

struct DynamicsConfig {
  std::string generator = "schmidt";  // schmidt | glauber | dephasing | depolarizing
  double rate = 1.0;
};

struct ExperimentSpec {
  std::string id;
  std::string kind;
  int criterion = 0;                // 0 when not tied to an acceptance criterion
  std::vector<std::string> checks;  // empty: the kind's default checks
  std::optional<ModelConfig> model;
  nlohmann::json params = nlohmann::json::object();
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string output;  // path prefix for <output>.jsonl / <output>.csv, may be empty
  ModelConfig model;
  DynamicsConfig dynamics;
  std::vector<ExperimentSpec> experiments;
};

// Throws SchemaError on unknown keys, wrong types, unknown kinds or checks, duplicate ids.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& c);

const std::vector<std::string>& experiment_kinds();
const std::vector<std::string>& kind_checks(const std::string& kind);
const std::vector<std::string>& default_checks(const std::string& kind);

struct Record {
  std::string id;
  std::string kind;
  int criterion = 0;
  nlohmann::json params;                  // everything needed to replay: model, seed, checks, params
  std::map<std::string, double> metrics;  // non-finite values survive the round trip as strings
  std::map<std::string, bool> checks;     // asserted checks
  std::string build;
  std::uint64_t seed = 0;

  bool passed() const;
};

nlohmann::json record_to_json(const Record& r);
Record record_from_json(const nlohmann::json& j);
bool operator==(const Record& a, const Record& b);

const char* build_id();

// Builds the model potential and its region (a chain for dim 1, an L^dim box otherwise).
LocalPotential build_potential(const ModelConfig& m);
Region build_region(const ModelConfig& m);
Lindbladian build_generator(const DynamicsConfig& d, const ModelConfig& m);

// Runs one experiment; errors are rethrown with the experiment id prepended.
Record run_experiment(const ExperimentSpec& e, const ExperimentConfig& c);
// Runs every experiment in order. Progress lines go to `log` when given.
std::vector<Record> run(const ExperimentConfig& c, std::ostream* log = nullptr);

std::string emit_jsonl(const std::vector<Record>& records);
std::vector<Record> parse_jsonl(const std::string& text);
// id,kind,criterion,type,name,value with rows in record order and names sorted.
std::string emit_csv(const std::vector<Record>& records);
// id,series,distance,value from metrics named <series>.d<distance>, in record and name order.
std::string emit_decay_table(const std::vector<Record>& records);
void write_outputs(const std::vector<Record>& records, const std::string& prefix);

// 0 if every asserted check passed, 2 otherwise.
int exit_code(const std::vector<Record>& records);

}  // namespace qgibbs
