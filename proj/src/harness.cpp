#include "qgibbs/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "qgibbs/applications.hpp"
#include "qgibbs/cluster_expansion.hpp"
#include "qgibbs/clustering.hpp"
#include "qgibbs/conditional_expectations.hpp"
#include "qgibbs/functionals.hpp"
#include "qgibbs/lattice.hpp"

#ifndef QGIBBS_BUILD_ID
#define QGIBBS_BUILD_ID "unknown"
#endif

namespace qgibbs {

using nlohmann::json;

const char* build_id() { return QGIBBS_BUILD_ID; }

// ---------------------------------------------------------------- schema

namespace {

struct KindInfo {
  std::vector<std::string> checks;
  std::vector<std::string> defaults;
  std::vector<std::string> params;
};

const std::map<std::string, KindInfo>& kinds() {
  static const std::map<std::string, KindInfo> k = {
      {"lattice", {{"tiling", "grained"}, {"tiling", "grained"}, {"D", "kappa", "L", "relaxed"}}},
      {"gibbs", {{"state"}, {"state"}, {}}},
      {"ce-check", {{"chain_rule", "axioms", "commutation"}, {"chain_rule", "axioms", "commutation"},
                    {"instances", "max_sites", "samples"}}},
      {"gap", {{"kernel", "ce_gap", "cmlsi", "model_gap"}, {"kernel", "ce_gap", "cmlsi"}, {"sizes"}}},
      {"mlsi", {{"depolarizing", "dephasing", "decay", "model"}, {"depolarizing", "dephasing", "decay"},
                {"samples", "descents", "steps", "states"}}},
      {"tensorization", {{"ssa", "thm46"}, {"ssa", "thm46"}, {"sizes", "samples", "ssa_samples", "fit_starts", "fit_iters"}}},
      {"expansion", {{"identity", "weights", "counts", "analyticity"}, {"identity", "weights", "counts", "analyticity"},
                     {"sizes", "samples", "max_size", "delta"}}},
      {"clustering", {{"decay", "zero"}, {"decay", "zero"}, {"n"}}},
      {"anneal", {{"envelope", "control", "energy_gap"}, {"envelope", "control", "energy_gap"},
                  {"T", "rate", "points", "witness_samples", "witness_descents"}}},
      {"apps", {{"transport", "concentration", "eth", "gibbs_prep", "hypothesis"},
                {"transport", "concentration", "eth", "gibbs_prep", "hypothesis"},
                {"instances", "starts", "eps", "witness_samples", "witness_descents"}}},
  };
  return k;
}

void reject_unknown(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw SchemaError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get_as(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(where + "." + key + ": " + e.what());
  }
}

ModelConfig parse_model(const json& j, const std::string& where) {
  reject_unknown(j, {"family", "dim", "L", "J", "hz", "beta"}, where);
  ModelConfig m;
  if (j.contains("family")) m.family = get_as<std::string>(j, "family", where);
  if (j.contains("dim")) m.dim = get_as<int>(j, "dim", where);
  if (j.contains("L")) m.L = get_as<int>(j, "L", where);
  if (j.contains("J")) m.J = get_as<double>(j, "J", where);
  if (j.contains("hz")) m.hz = get_as<double>(j, "hz", where);
  if (j.contains("beta")) m.beta = get_as<double>(j, "beta", where);
  if (m.family != "ising") throw SchemaError(where + ".family: only 'ising' is supported");
  if (m.dim < 1 || m.dim > 2) throw SchemaError(where + ".dim: must be 1 or 2");
  if (m.L < 1) throw SchemaError(where + ".L: must be positive");
  if (m.beta < 0) throw SchemaError(where + ".beta: must be non-negative");
  return m;
}

json model_to_json(const ModelConfig& m) {
  return {{"family", m.family}, {"dim", m.dim}, {"L", m.L}, {"J", m.J}, {"hz", m.hz}, {"beta", m.beta}};
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : kinds()) v.push_back(k);
    return v;
  }();
  return names;
}

const std::vector<std::string>& kind_checks(const std::string& kind) {
  auto it = kinds().find(kind);
  if (it == kinds().end()) throw SchemaError("unknown experiment kind '" + kind + "'");
  return it->second.checks;
}

const std::vector<std::string>& default_checks(const std::string& kind) {
  auto it = kinds().find(kind);
  if (it == kinds().end()) throw SchemaError("unknown experiment kind '" + kind + "'");
  return it->second.defaults;
}

ExperimentConfig parse_config(const json& j) {
  reject_unknown(j, {"seed", "output", "model", "dynamics", "experiments"}, "config");
  ExperimentConfig c;
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed", "config");
  if (j.contains("output")) c.output = get_as<std::string>(j, "output", "config");
  if (j.contains("model")) c.model = parse_model(j.at("model"), "model");
  if (j.contains("dynamics")) {
    const json& d = j.at("dynamics");
    reject_unknown(d, {"generator", "rate"}, "dynamics");
    if (d.contains("generator")) c.dynamics.generator = get_as<std::string>(d, "generator", "dynamics");
    if (d.contains("rate")) c.dynamics.rate = get_as<double>(d, "rate", "dynamics");
    static const std::set<std::string> gens = {"schmidt", "glauber", "dephasing", "depolarizing"};
    if (!gens.count(c.dynamics.generator)) throw SchemaError("dynamics.generator: unknown '" + c.dynamics.generator + "'");
    if (c.dynamics.rate <= 0) throw SchemaError("dynamics.rate: must be positive");
  }
  std::set<std::string> ids;
  if (j.contains("experiments")) {
    const json& ex = j.at("experiments");
    if (!ex.is_array()) throw SchemaError("experiments: expected an array");
    for (size_t i = 0; i < ex.size(); ++i) {
      const json& e = ex[i];
      std::string where = "experiments[" + std::to_string(i) + "]";
      if (!e.is_object() || !e.contains("kind")) throw SchemaError(where + ": needs a 'kind'");
      ExperimentSpec s;
      s.kind = get_as<std::string>(e, "kind", where);
      auto kit = kinds().find(s.kind);
      if (kit == kinds().end()) throw SchemaError(where + ".kind: unknown '" + s.kind + "'");
      std::vector<std::string> allowed = {"id", "kind", "criterion", "checks", "model"};
      allowed.insert(allowed.end(), kit->second.params.begin(), kit->second.params.end());
      reject_unknown(e, allowed, where);
      s.id = e.contains("id") ? get_as<std::string>(e, "id", where) : s.kind + "-" + std::to_string(i);
      if (!ids.insert(s.id).second) throw SchemaError(where + ".id: duplicate '" + s.id + "'");
      if (e.contains("criterion")) s.criterion = get_as<int>(e, "criterion", where);
      if (e.contains("checks")) {
        s.checks = get_as<std::vector<std::string>>(e, "checks", where);
        for (const auto& ch : s.checks)
          if (std::find(kit->second.checks.begin(), kit->second.checks.end(), ch) == kit->second.checks.end())
            throw SchemaError(where + ".checks: '" + ch + "' is not a check of kind " + s.kind);
      }
      if (e.contains("model")) s.model = parse_model(e.at("model"), where + ".model");
      for (const auto& key : kit->second.params)
        if (e.contains(key)) {
          if (!e.at(key).is_number() && !e.at(key).is_boolean() && !e.at(key).is_array())
            throw SchemaError(where + "." + key + ": expected a number, boolean or array");
          s.params[key] = e.at(key);
        }
      c.experiments.push_back(std::move(s));
    }
  }
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  if (!c.output.empty()) j["output"] = c.output;
  j["model"] = model_to_json(c.model);
  j["dynamics"] = {{"generator", c.dynamics.generator}, {"rate", c.dynamics.rate}};
  json ex = json::array();
  for (const auto& e : c.experiments) {
    json je = e.params;
    je["id"] = e.id;
    je["kind"] = e.kind;
    if (e.criterion) je["criterion"] = e.criterion;
    if (!e.checks.empty()) je["checks"] = e.checks;
    if (e.model) je["model"] = model_to_json(*e.model);
    ex.push_back(je);
  }
  j["experiments"] = ex;
  return j;
}

// ---------------------------------------------------------------- records

bool Record::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& kv) { return kv.second; });
}

namespace {

json number_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  std::string s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  throw SchemaError("record: bad metric value '" + s + "'");
}

}  // namespace

json record_to_json(const Record& r) {
  json m = json::object();
  for (const auto& [k, v] : r.metrics) m[k] = number_to_json(v);
  json ch = json::object();
  for (const auto& [k, v] : r.checks) ch[k] = v;
  return {{"id", r.id},
          {"kind", r.kind},
          {"criterion", r.criterion},
          {"params", r.params},
          {"metrics", m},
          {"checks", ch},
          {"provenance", {{"build", r.build}, {"seed", r.seed}}}};
}

Record record_from_json(const json& j) {
  Record r;
  r.id = j.at("id").get<std::string>();
  r.kind = j.at("kind").get<std::string>();
  r.criterion = j.at("criterion").get<int>();
  r.params = j.at("params");
  for (auto it = j.at("metrics").begin(); it != j.at("metrics").end(); ++it) r.metrics[it.key()] = number_from_json(*it);
  for (auto it = j.at("checks").begin(); it != j.at("checks").end(); ++it) r.checks[it.key()] = it->get<bool>();
  r.build = j.at("provenance").at("build").get<std::string>();
  r.seed = j.at("provenance").at("seed").get<std::uint64_t>();
  return r;
}

bool operator==(const Record& a, const Record& b) { return record_to_json(a) == record_to_json(b); }

std::string emit_jsonl(const std::vector<Record>& records) {
  std::string out;
  for (const auto& r : records) out += record_to_json(r).dump() + "\n";
  return out;
}

std::vector<Record> parse_jsonl(const std::string& text) {
  std::vector<Record> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(record_from_json(json::parse(line)));
  return out;
}

std::string emit_csv(const std::vector<Record>& records) {
  std::ostringstream os;
  os << "id,kind,criterion,type,name,value\n";
  char buf[64];
  for (const auto& r : records) {
    for (const auto& [k, v] : r.metrics) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << r.id << ',' << r.kind << ',' << r.criterion << ",metric," << k << ',' << buf << '\n';
    }
    for (const auto& [k, v] : r.checks)
      os << r.id << ',' << r.kind << ',' << r.criterion << ",check," << k << ',' << (v ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string emit_decay_table(const std::vector<Record>& records) {
  std::ostringstream os;
  os << "id,series,distance,value\n";
  char buf[64];
  for (const auto& r : records)
    for (const auto& [k, v] : r.metrics) {
      auto dot = k.rfind(".d");
      if (dot == std::string::npos || dot + 2 >= k.size()) continue;
      std::string tail = k.substr(dot + 2);
      if (!std::all_of(tail.begin(), tail.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) continue;
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << r.id << ',' << k.substr(0, dot) << ',' << tail << ',' << buf << '\n';
    }
  return os.str();
}

void write_outputs(const std::vector<Record>& records, const std::string& prefix) {
  std::ofstream j(prefix + ".jsonl", std::ios::binary);
  std::ofstream c(prefix + ".csv", std::ios::binary);
  if (!j || !c) throw std::runtime_error("cannot write outputs with prefix '" + prefix + "'");
  j << emit_jsonl(records);
  c << emit_csv(records);
}

int exit_code(const std::vector<Record>& records) {
  for (const auto& r : records)
    if (!r.passed()) return 2;
  return 0;
}

// ---------------------------------------------------------------- models

LocalPotential build_potential(const ModelConfig& m) { return ising_family(m.dim, m.L, m.J, m.hz, m.beta); }

Region build_region(const ModelConfig& m) {
  if (m.dim == 1) return chain_region(m.L);
  return box_region(Site(m.dim, 0), Site(m.dim, m.L - 1));
}

Lindbladian build_generator(const DynamicsConfig& d, const ModelConfig& m) {
  LocalPotential p = build_potential(m);
  Region lam = build_region(m);
  Lindbladian l;
  if (d.generator == "schmidt") {
    l = schmidt_generator(lam, p, lam, m.beta);
  } else if (d.generator == "glauber") {
    l = glauber_generator(lam, p, lam, m.beta);
  } else if (d.generator == "dephasing") {
    l = dephasing_generator(lam);
  } else if (d.generator == "depolarizing") {
    l = depolarizing_generator(gibbs_state(p, lam, m.beta), std::vector<int>(lam.size(), 2));
  } else {
    throw SchemaError("unknown generator '" + d.generator + "'");
  }
  for (auto& r : l.rates) r *= d.rate;
  if (l.dense.size()) l.dense *= d.rate;
  return l;
}

// ---------------------------------------------------------------- experiments

namespace {

struct Ctx {
  const ExperimentSpec& spec;
  const ExperimentConfig& cfg;
  ModelConfig model;
  std::set<std::string> checks;
  Record& rec;

  bool want(const std::string& c) const { return checks.count(c) > 0; }
  template <class T>
  T param(const std::string& key, T def) const {
    return spec.params.contains(key) ? spec.params.at(key).get<T>() : def;
  }
  Rng rng(const std::string& stream, std::uint64_t index) const { return Rng(cfg.seed, spec.id + "/" + stream, index); }
  void metric(const std::string& k, double v) { rec.metrics[k] = v; }
  void check(const std::string& k, bool v) { rec.checks[k] = v; }
};

std::vector<Region> nonempty_subsets(const Region& lam) {
  std::vector<Region> out;
  const int n = static_cast<int>(lam.size());
  for (int mask = 1; mask < (1 << n); ++mask) {
    Region a;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) a.push_back(lam[i]);
    out.push_back(a);
  }
  return out;
}

Lindbladian single_ce_generator(const ConditionalExpectation& e, const Mat& sigma) {
  Lindbladian l;
  l.dims = e.dims();
  l.ces = {e};
  l.rates = {1.0};
  l.sigma = sigma;
  l.region = e.region;
  l.kind = e.kind;
  return l;
}

WitnessConfig witness_cfg(const Ctx& c, std::uint64_t seed_offset) {
  WitnessConfig w;
  w.samples = c.param("witness_samples", 512);
  w.descents = c.param("witness_descents", 32);
  w.seed = stream_seed(c.cfg.seed, c.spec.id + "/witness", seed_offset);
  return w;
}

LocalPotential chain_model(const ModelConfig& m, int n, double beta) { return ising_family(1, n, m.J, m.hz, beta); }

// ---- lattice

void exp_lattice(Ctx& c) {
  int D = c.param("D", 1), kappa = c.param("kappa", 2), L = c.param("L", 12);
  bool relaxed = c.param("relaxed", true);
  Region w = c.model.dim == 1 ? chain_region(L) : box_region(Site(c.model.dim, 0), Site(c.model.dim, L - 1));
  Tiling t = build_tiling(c.model.dim, D, kappa, w, relaxed);
  if (c.want("tiling")) {
    auto rep = check_tiling(t, w);
    c.metric("tiling.pixels", static_cast<double>(t.pixels.size()));
    c.metric("tiling.min_pixel_distance", rep.min_pixel_distance);
    c.check("tiling", rep.covers_window && rep.min_pixel_distance == kappa);
  }
  if (c.want("grained")) {
    int ok = 0, total = 0;
    for (size_t i = 0; i < t.pixels.size(); ++i)
      for (size_t j = i + 1; j < t.pixels.size(); ++j) {
        if (!pixels_adjacent(t, static_cast<int>(i), static_cast<int>(j))) continue;
        ++total;
        ok += check_grained(grained_set({static_cast<int>(i), static_cast<int>(j)}, t), t).ok();
      }
    c.metric("grained.pairs", total);
    c.check("grained", ok == total);
  }
}

// ---- gibbs

void exp_gibbs(Ctx& c) {
  LocalPotential p = build_potential(c.model);
  Region lam = build_region(c.model);
  auto cr = verify_commuting(p);
  Mat s = gibbs_state(p, lam, c.model.beta);
  Eig e = herm_eig(hamiltonian(p, lam));
  double top = (-c.model.beta * e.vals.array()).maxCoeff();
  c.metric("state.log_z", top + std::log((-c.model.beta * e.vals.array() - top).exp().sum()));
  c.metric("state.trace", s.trace().real());
  c.metric("state.min_eig", min_eig(s));
  c.metric("state.max_commutator", cr.max_commutator);
  c.check("state", cr.commuting && std::abs(s.trace().real() - 1) < 1e-12 && min_eig(s) > 0);
}

// ---- conditional expectations

void exp_ce(Ctx& c) {
  const double beta = c.model.beta;
  if (c.want("chain_rule")) {
    int instances = c.param("instances", 200);
    Region lam = chain_region(3);
    double worst = 0;
    for (int i = 0; i < instances; ++i) {
      Rng rng = c.rng("chain_rule", i);
      std::vector<std::pair<std::pair<Site, Site>, double>> a;
      std::vector<std::pair<Site, double>> b;
      for (int k = 0; k < 2; ++k) a.push_back({{{k}, {k + 1}}, 2 * rng.uniform() - 1});
      for (int k = 0; k < 3; ++k) b.push_back({{k}, 2 * rng.uniform() - 1});
      LocalPotential p = ising_from_coefficients(lam, a, b, beta);
      int mask = rng.integer(1, 7);
      Region sub;
      for (int k = 0; k < 3; ++k)
        if (mask >> k & 1) sub.push_back({k});
      ConditionalExpectation e = i % 2 == 0 ? schmidt_ce(sub, p, lam, beta) : glauber_ce(sub, p, lam, beta);
      Mat sigma = gibbs_state(p, lam, beta);
      Mat rho = random_state(8, rng);
      worst = std::max(worst, chain_rule_check(rho, sigma, dual_of(e)).residual);
    }
    c.metric("chain_rule.instances", instances);
    c.metric("chain_rule.max_residual", worst);
    c.check("chain_rule", worst <= 1e-10);
  }
  if (c.want("axioms")) {
    int max_sites = c.param("max_sites", 5), samples = c.param("samples", 5);
    double worst = 0;
    int count = 0;
    for (int n = 1; n <= max_sites; ++n) {
      LocalPotential p = chain_model(c.model, n, beta);
      Region lam = chain_region(n);
      Mat sigma = gibbs_state(p, lam, beta);
      int idx = 0;
      for (const auto& a : nonempty_subsets(lam))
        for (int kind = 0; kind < 2; ++kind) {
          ConditionalExpectation e = kind == 0 ? schmidt_ce(a, p, lam, beta) : glauber_ce(a, p, lam, beta);
          auto rep = verify_ce_axioms(e, sigma, samples, stream_seed(c.cfg.seed, c.spec.id + "/axioms", n * 1000 + idx++));
          worst = std::max(worst, rep.max());
          ++count;
        }
    }
    c.metric("axioms.count", count);
    c.metric("axioms.max_residual", worst);
    c.check("axioms", worst <= 1e-10);
  }
  if (c.want("commutation")) {
    int max_sites = c.param("max_sites", 5);
    double worst = 0, worst_union = 0;
    int pairs = 0;
    bool applicable = true;
    for (int n = 3; n <= max_sites; ++n) {
      LocalPotential p = chain_model(c.model, n, beta);
      Region lam = chain_region(n);
      Tiling t = build_tiling(1, 1, 2, lam, true);
      std::vector<Region> pix;
      for (const auto& px : t.pixels)
        if (!region_intersection(px, lam).empty()) pix.push_back(region_intersection(px, lam));
      for (size_t i = 0; i < pix.size(); ++i)
        for (size_t j = i + 1; j < pix.size(); ++j) {
          auto ea = schmidt_ce(pix[i], p, lam, beta), eb = schmidt_ce(pix[j], p, lam, beta);
          auto eab = schmidt_ce(region_union(pix[i], pix[j]), p, lam, beta);
          auto rep = verify_commutation(ea, eb, &eab, 3, stream_seed(c.cfg.seed, c.spec.id + "/comm", pairs));
          applicable = applicable && rep.applicable;
          worst = std::max(worst, rep.commutator);
          worst_union = std::max(worst_union, rep.union_residual);
          ++pairs;
        }
    }
    c.metric("commutation.pairs", pairs);
    c.metric("commutation.max_commutator", worst);
    c.metric("commutation.max_union_residual", worst_union);
    c.check("commutation", applicable && pairs > 0 && worst <= 1e-10);
  }
}

// ---- gap and kernels

void exp_gap(Ctx& c) {
  const double beta = c.model.beta;
  std::vector<int> sizes = c.param("sizes", std::vector<int>{2, 3, 4});
  if (c.want("kernel")) {
    int cases = 0, mismatches = 0;
    for (int n : sizes) {
      LocalPotential p = chain_model(c.model, n, beta);
      Region lam = chain_region(n);
      for (const auto& a : nonempty_subsets(lam)) {
        int k = kernel_dimension(schmidt_generator(a, p, lam, beta));
        long f = schmidt_ce(a, p, lam, beta).fixed_algebra_dim();
        mismatches += k != f;
        ++cases;
      }
    }
    c.metric("kernel.cases", cases);
    c.metric("kernel.mismatches", mismatches);
    c.check("kernel", cases > 0 && mismatches == 0);
  }
  if (c.want("ce_gap")) {
    double worst = 0;
    int cases = 0, trivial = 0;
    for (int n : sizes) {
      LocalPotential p = chain_model(c.model, n, beta);
      Region lam = chain_region(n);
      Mat sigma = gibbs_state(p, lam, beta);
      for (const auto& a : nonempty_subsets(lam))
        for (int kind = 0; kind < 2; ++kind) {
          auto e = kind == 0 ? schmidt_ce(a, p, lam, beta) : glauber_ce(a, p, lam, beta);
          double g = spectral_gap(single_ce_generator(e, sigma), sigma);
          if (std::isinf(g)) {
            ++trivial;
            continue;
          }
          worst = std::max(worst, std::abs(g - 1.0));
          ++cases;
        }
    }
    c.metric("ce_gap.cases", cases);
    c.metric("ce_gap.trivial", trivial);
    c.metric("ce_gap.max_deviation", worst);
    c.check("ce_gap", cases > 0 && worst <= 1e-10);
  }
  if (c.want("cmlsi")) {
    double v = cmlsi_bound(1.0, Mat::Identity(2, 2) / 2.0, 2);
    c.metric("cmlsi.value", v);
    c.check("cmlsi", v == 0.125);
  }
  if (c.want("model_gap")) {
    Lindbladian l = build_generator(c.cfg.dynamics, c.model);
    c.metric("model_gap.value", spectral_gap(l, l.sigma));
  }
}

// ---- MLSI witnesses

void exp_mlsi(Ctx& c) {
  WitnessConfig w;
  w.samples = c.param("samples", 512);
  w.descents = c.param("descents", 32);
  w.steps = c.param("steps", 40);
  w.seed = stream_seed(c.cfg.seed, c.spec.id + "/witness", 0);
  Mat half = Mat::Identity(2, 2) / 2.0;
  Lindbladian dep = depolarizing_generator(half, {2});
  Lindbladian deph = dephasing_generator(chain_region(1));
  if (c.want("depolarizing")) {
    auto r = mlsi_witness(dep, half, w);
    c.metric("depolarizing.witness", r.quantity);
    c.metric("depolarizing.samples", r.samples);
    c.check("depolarizing", r.quantity >= 0.5 - 1e-6);
  }
  if (c.want("dephasing")) {
    auto r = mlsi_witness(deph, half, w);
    c.metric("dephasing.witness", r.quantity);
    c.metric("dephasing.samples", r.samples);
    c.check("dephasing", r.quantity >= 0.25 - 1e-6);
  }
  if (c.want("decay")) {
    int states = c.param("states", 100);
    std::vector<double> times;
    for (int k = 0; k <= 20; ++k) times.push_back(0.25 * k);
    double worst = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (auto [l, alpha, tag] : {std::tuple{&dep, 0.5, "depolarizing"}, std::tuple{&deph, 0.25, "dephasing"}}) {
      DualMap e_star = dual_of_superop(stationary_projection_dual(*l, half));
      for (int i = 0; i < states; ++i) {
        Rng rng = c.rng(std::string("decay/") + tag, i);
        auto rep = decay_check(*l, random_state(2, rng), e_star, alpha, times);
        worst = std::min(worst, rep.worst_margin);
        ok = ok && rep.holds && rep.monotone;
      }
    }
    c.metric("decay.states", 2 * states);
    c.metric("decay.worst_margin", worst);
    c.check("decay", ok);
  }
  if (c.want("model")) {
    Lindbladian l = build_generator(c.cfg.dynamics, c.model);
    c.metric("model.witness", mlsi_witness(l, l.sigma, w).quantity);
  }
}

// ---- approximate tensorization

struct FittedClustering {
  double c = 0;
  double xi = 1;
  double r2 = 0;
  int points = 0;
};

// L1 -> L_inf clustering of the Schmidt CEs on C' = [1, 1+k], D' = [2, 2+k], fitted to
// c |C' u D'| e^{-dist/xi}: xi from the log-linear fit, c as the envelope over the points.
FittedClustering fit_schmidt_clustering(const LocalPotential& p, const Region& lam, double beta,
                                        const L1LinfConfig& cfg) {
  const int n = static_cast<int>(lam.size());
  std::vector<std::pair<double, double>> pts;
  std::vector<double> sizes;
  for (int k = 1; 2 + k < n; ++k) {
    Region cc, dd;
    for (int s = 1; s <= 1 + k; ++s) cc.push_back({s});
    for (int s = 2; s <= 2 + k; ++s) dd.push_back({s});
    auto ec = schmidt_ce(cc, p, lam, beta), ed = schmidt_ce(dd, p, lam, beta);
    auto ecd = schmidt_ce(region_union(cc, dd), p, lam, beta);
    pts.push_back({static_cast<double>(k + 1), l1_to_linf_norm(ec, ed, ecd, cfg).value});
    sizes.push_back(static_cast<double>(k + 2));
  }
  FittedClustering f;
  f.points = static_cast<int>(pts.size());
  if (pts.size() < 3) throw PreconditionError("fit_schmidt_clustering: chain too short for a fit");
  DecayFit fit = fit_decay(pts);
  if (fit.no_correlation || !std::isfinite(fit.xi)) return f;
  f.xi = fit.xi;
  f.r2 = fit.r2;
  for (size_t i = 0; i < pts.size(); ++i) f.c = std::max(f.c, pts[i].second / (sizes[i] * std::exp(-pts[i].first / f.xi)));
  return f;
}

void exp_tensorization(Ctx& c) {
  if (c.want("ssa")) {
    int samples = c.param("ssa_samples", 100);
    LocalPotential empty;
    Region lam = chain_region(3);
    Region cc = {{0}, {1}}, dd = {{1}, {2}};
    auto ec = schmidt_ce(cc, empty, lam, 0.0), ed = schmidt_ce(dd, empty, lam, 0.0), ecd = schmidt_ce(lam, empty, lam, 0.0);
    double worst = std::numeric_limits<double>::infinity(), mult = 0;
    for (int i = 0; i < samples; ++i) {
      Rng rng = c.rng("ssa", i);
      auto rep = approximate_tensorization_check(random_state(8, rng), dual_of(ec), dual_of(ed), dual_of(ecd), 0.0, 1.0,
                                                 2.0, 3);
      worst = std::min(worst, rep.margin);
      mult = std::max(mult, rep.multiplier);
    }
    c.metric("ssa.worst_margin", worst);
    c.metric("ssa.multiplier", mult);
    c.check("ssa", mult == 1.0 && worst >= -1e-9);
  }
  if (c.want("thm46")) {
    std::vector<int> sizes = c.param("sizes", std::vector<int>{6, 7, 8});
    int samples = c.param("samples", 50);
    const double beta = c.model.beta;
    double worst = std::numeric_limits<double>::infinity();
    bool hypothesis = true;
    for (int n : sizes) {
      LocalPotential p = chain_model(c.model, n, beta);
      Region lam = chain_region(n);
      std::string tag = "thm46.n" + std::to_string(n);
      L1LinfConfig lc;
      lc.starts = c.param("fit_starts", lc.starts);
      lc.iters = c.param("fit_iters", lc.iters);
      lc.seed = stream_seed(c.cfg.seed, c.spec.id + "/fit", n);
      FittedClustering fc = fit_schmidt_clustering(p, lam, beta, lc);
      c.metric(tag + ".c", fc.c);
      c.metric(tag + ".xi", fc.xi);
      c.metric(tag + ".fit_r2", fc.r2);

      Tiling t = build_tiling(1, 1, 2, lam, true);
      Region a;
      std::vector<int> inside;
      for (size_t i = 0; i < t.pixels.size(); ++i) {
        Region px = region_intersection(t.pixels[i], lam);
        if (px.size() == t.pixels[i].size()) {
          inside.push_back(static_cast<int>(i));
          a = region_union(a, px);
        }
      }
      const int np = static_cast<int>(inside.size());
      std::vector<int> left(inside.begin(), inside.end() - 1), right(inside.begin() + 1, inside.end());
      Region cc = grained_set(left, t).region, dd = grained_set(right, t).region;
      cc = region_intersection(cc, lam);
      dd = region_intersection(dd, lam);
      double dist_cd = dist(region_difference(cc, dd), region_difference(dd, cc));
      long size = static_cast<long>(region_union(cc, dd).size());
      c.metric(tag + ".pixels", np);
      c.metric(tag + ".dist", dist_cd);
      c.metric(tag + ".size", static_cast<double>(size));
      double mult;
      try {
        mult = tensorization_multiplier(fc.c, size, dist_cd, fc.xi);
      } catch (const PreconditionError&) {
        hypothesis = false;
        c.metric(tag + ".multiplier", std::numeric_limits<double>::infinity());
        continue;
      }
      c.metric(tag + ".multiplier", mult);

      auto ea = schmidt_ce(a, p, lam, beta);
      auto ec = schmidt_ce(cc, p, lam, beta), ed = schmidt_ce(dd, p, lam, beta);
      auto ecd = schmidt_ce(region_union(cc, dd), p, lam, beta);
      double local_worst = std::numeric_limits<double>::infinity();
      for (int i = 0; i < samples; ++i) {
        Rng rng = c.rng(tag, i);
        Mat omega = ea.apply_dual(random_state(1 << n, rng));
        auto rep = approximate_tensorization_check(omega, dual_of(ec), dual_of(ed), dual_of(ecd), fc.c, fc.xi, dist_cd, size);
        local_worst = std::min(local_worst, rep.margin);
      }
      c.metric(tag + ".worst_margin", local_worst);
      worst = std::min(worst, local_worst);
    }
    c.metric("thm46.worst_margin", worst);
    c.check("thm46", hypothesis && worst >= -1e-9);
  }
}

// ---- cluster expansion

void exp_expansion(Ctx& c) {
  std::vector<int> sizes = c.param("sizes", std::vector<int>{2, 3, 4});
  if (c.want("identity")) {
    double worst = 0;
    int cases = 0;
    Mat up = Mat::Zero(2, 2);
    up(0, 0) = 1;
    for (int n : sizes) {
      LocalPotential p = chain_model(c.model, n, c.model.beta);
      Region lam = chain_region(n);
      auto z = sample_disc(p, c.model.beta, 0.5, stream_seed(c.cfg.seed, c.spec.id + "/identity", 0), n);
      for (const auto& x0 : lam) {
        worst = std::max(worst, cluster_identity_check(lam, p, x0, {}, z).residual);
        ++cases;
        Site far = {x0[0] < n / 2 ? n - 1 : 0};
        if (far == x0) continue;
        worst = std::max(worst, cluster_identity_check(lam, p, x0, {{far, up}}, z).residual);
        ++cases;
      }
    }
    c.metric("identity.cases", cases);
    c.metric("identity.max_residual", worst);
    c.check("identity", worst <= 1e-10);
  }
  if (c.want("weights")) {
    LocalPotential p = chain_model(c.model, 4, c.model.beta);
    auto z = sample_disc(p, c.model.beta, 0.5, stream_seed(c.cfg.seed, c.spec.id + "/weights", 0), 0);
    double worst = 0;
    int sets = 0;
    for (const auto& x0 : p.sites())
      for (const auto& s : connected_sets(x0, p, c.param("max_size", 3))) {
        worst = std::max(worst, std::abs(cluster_weight(s, p, z) - cluster_weight(s, p, z, WeightMode::Truncated, 20)));
        ++sets;
      }
    c.metric("weights.sets", sets);
    c.metric("weights.max_difference", worst);
    c.check("weights", worst <= 1e-10);
  }
  if (c.want("counts")) {
    bool ok = true;
    long rows = 0;
    for (const auto& p : {ising_family(1, 7, c.model.J, c.model.hz, c.model.beta), ising_family(1, 7, c.model.J, 0.0, c.model.beta),
                          ising_family(2, 3, c.model.J, c.model.hz, c.model.beta), ising_family(2, 3, c.model.J, 0.0, c.model.beta)})
      for (const auto& x0 : p.sites())
        for (const auto& row : connected_set_counts(x0, p, 4)) {
          ok = ok && row.count <= row.bound;
          ++rows;
        }
    c.metric("counts.rows", static_cast<double>(rows));
    c.check("counts", ok);
  }
  if (c.want("analyticity")) {
    LocalPotential p = chain_model(c.model, 4, c.model.beta);
    Region lam = chain_region(4);
    double delta = c.param("delta", 0.001);
    int samples = c.param("samples", 200);
    double bc = beta_c(growth_constant(p), p.strength(), p.kappa, delta);
    double beta = bc / 2;
    std::uint64_t seed = stream_seed(c.cfg.seed, c.spec.id + "/analyticity", 0);
    auto a = analyticity_bound_check(lam, p, beta, delta, Mat::Identity(16, 16), samples, seed);
    double ratio_margin = std::numeric_limits<double>::infinity();
    bool ratio_ok = true;
    for (size_t i = 0; i < lam.size(); ++i) {
      auto r = log_ratio_check(lam, lam[i], p, beta, delta, samples, seed + 1 + i);
      ratio_margin = std::min(ratio_margin, r.margin);
      ratio_ok = ratio_ok && r.holds && r.asserted;
    }
    c.metric("analyticity.beta_c", bc);
    c.metric("analyticity.beta", beta);
    c.metric("analyticity.margin", a.margin);
    c.metric("analyticity.ratio_margin", ratio_margin);
    c.check("analyticity", a.holds && a.asserted && ratio_ok);
  }
}

// ---- clustering

void exp_clustering(Ctx& c) {
  int n = c.param("n", 8);
  if (c.want("decay")) {
    auto rep = clustering_report(chain_model(c.model, n, c.model.beta), n, c.model.beta);
    for (auto [tag, prof] : {std::pair{"linf", &rep.linf}, std::pair{"l2", &rep.l2}, std::pair{"l2zero", &rep.l2zero},
                             std::pair{"qiiid", &rep.qiiid}}) {
      c.metric(std::string("decay.") + tag + ".c", prof->fit.c);
      c.metric(std::string("decay.") + tag + ".xi", prof->fit.xi);
      c.metric(std::string("decay.") + tag + ".r2", prof->fit.r2);
      // envelope over probes at each distance, the points the fit sees
      std::map<int, double> env;
      for (const auto& [d, v] : prof->raw) env[static_cast<int>(d)] = std::max(env[static_cast<int>(d)], v);
      for (const auto& [d, v] : env) c.metric(std::string("decay.") + tag + ".d" + std::to_string(d), v);
    }
    c.metric("decay.ordering_violations", rep.ordering_violations);
    c.metric("decay.cauchy_schwarz_excess", rep.max_cauchy_schwarz_excess);
    for (const auto& [d, v] : rep.l1_linf) c.metric("decay.l1_linf.d" + std::to_string(static_cast<int>(d)), v);
    bool fits = !rep.linf.fit.no_correlation && !rep.l2.fit.no_correlation;
    c.check("decay", fits && rep.linf.fit.r2 >= 0.99 && rep.l2.fit.r2 >= 0.99);
  }
  if (c.want("zero")) {
    auto rep = clustering_report(chain_model(c.model, n, 0.0), n, 0.0);
    double worst = 0;
    for (auto* prof : {&rep.linf, &rep.l2, &rep.l2zero})
      for (const auto& [d, v] : prof->raw) worst = std::max(worst, std::abs(v));
    c.metric("zero.max_covariance", worst);
    c.check("zero", worst <= 1e-12);
  }
}

// ---- annealer

struct GlauberModel {
  LocalPotential p;
  Region lam;
  Lindbladian l;
  Mat sigma;
  NormalForm nf;
};

GlauberModel glauber_model(const ModelConfig& m, int n) {
  GlauberModel g;
  g.p = chain_model(m, n, m.beta);
  g.lam = chain_region(n);
  g.l = glauber_generator(g.lam, g.p, g.lam, m.beta);
  g.sigma = gibbs_state(g.p, g.lam, m.beta);
  g.nf = normal_form(g.l, g.sigma);
  return g;
}

void exp_anneal(Ctx& c) {
  GlauberModel g = glauber_model(c.model, 3);
  double alpha = mlsi_witness(g.l, g.sigma, witness_cfg(c, 0)).quantity;
  c.metric("alpha_witness", alpha);
  double T = c.param("T", 20.0), rate = c.param("rate", 1.0);
  int points = c.param("points", 50);
  std::vector<double> times(points);
  for (int i = 0; i < points; ++i) times[i] = T * i / (points - 1);
  Mat h1 = hamiltonian(g.p, g.lam), h0 = transverse_field(3);
  if (c.want("envelope") || c.want("energy_gap")) {
    auto s = linear_schedule(h0, h1, T, rate);
    auto tr = annealer_evolve(s, plus_state(3), g.l, times);
    auto rep = relent_decay_bound(tr, g.sigma, alpha, s);
    c.metric("envelope.worst_margin", rep.worst_margin);
    c.metric("envelope.final_relent", rep.d.back());
    c.metric("envelope.final_bound", rep.bound.back());
    c.metric("envelope.max_negativity", tr.max_negativity);
    if (c.want("envelope")) c.check("envelope", rep.holds);
    if (c.want("energy_gap")) {
      auto e = annealer_energy_gap(tr.rho.back(), g.sigma, h1, g.nf, alpha, rep.bound.back());
      c.metric("energy_gap.lhs", e.lhs);
      c.metric("energy_gap.bound", e.bound);
      c.metric("energy_gap.lip", e.lip);
      c.check("energy_gap", e.holds);
    }
  }
  if (c.want("control")) {
    auto s = linear_schedule(h1, h1, T, rate);
    auto tr = annealer_evolve(s, plus_state(3), g.l, times);
    auto rep = relent_decay_bound(tr, g.sigma, alpha, s, 1e-8);
    double drift = *std::max_element(rep.drift.begin(), rep.drift.end());
    c.metric("control.max_drift", drift);
    c.metric("control.worst_margin", rep.worst_margin);
    c.check("control", drift <= 1e-8 && rep.holds);
  }
}

// ---- applications

void exp_apps(Ctx& c) {
  const double beta = c.model.beta;
  if (c.want("transport")) {
    GlauberModel g = glauber_model(c.model, 3);
    double alpha = mlsi_witness(g.l, g.sigma, witness_cfg(c, 1)).quantity;
    AscentConfig ac;
    ac.starts = c.param("starts", 64);
    ac.seed = stream_seed(c.cfg.seed, c.spec.id + "/ascent", 0);
    int instances = c.param("instances", 50);
    double worst_dual = 0, worst_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < instances; ++i) {
      Rng rng = c.rng("transport", i);
      auto r = transport_check(random_state(8, rng), g.sigma, g.nf, alpha, ac);
      worst_dual = std::max(worst_dual, r.duality_residual);
      worst_margin = std::min(worst_margin, r.margin);
    }
    c.metric("transport.alpha_witness", alpha);
    c.metric("transport.max_duality_residual", worst_dual);
    c.metric("transport.worst_margin", worst_margin);
    c.check("transport", worst_dual <= 1e-10 && worst_margin >= 0);
  }
  if (c.want("concentration")) {
    GlauberModel g = glauber_model(c.model, 3);
    double alpha = mlsi_witness(g.l, g.sigma, witness_cfg(c, 2)).quantity;
    Mat mag = Mat::Zero(8, 8);
    for (int i = 0; i < 3; ++i) mag += embed_legs(pauli('Z'), {2, 2, 2}, {i});
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 16; ++k) worst = std::min(worst, concentration_check(g.sigma, mag, 0.25 * k, alpha, g.nf).margin);
    c.metric("concentration.alpha_witness", alpha);
    c.metric("concentration.worst_margin", worst);
    c.check("concentration", worst >= -1e-12);
  }
  if (c.want("eth")) {
    GlauberModel g = glauber_model(c.model, 4);
    double alpha = mlsi_witness(g.l, g.sigma, witness_cfg(c, 3)).quantity;
    Mat h = hamiltonian(g.p, g.lam);
    Mat avg = Mat::Zero(16, 16);
    for (int i = 0; i < 4; ++i) avg += embed_legs(pauli('Z'), {2, 2, 2, 2}, {i}) / 4.0;
    double worst = std::numeric_limits<double>::infinity(), ident = 0;
    for (int m = 0; m < 16; ++m) {
      auto r = eth_check(g.sigma, h, beta, m, avg, alpha, g.nf);
      worst = std::min(worst, r.margin);
      ident = std::max(ident, r.identity_residual);
    }
    c.metric("eth.alpha_witness", alpha);
    c.metric("eth.worst_margin", worst);
    c.metric("eth.max_identity_residual", ident);
    c.check("eth", worst >= -1e-12 && ident <= 1e-10);
  }
  if (c.want("gibbs_prep")) {
    LocalPotential p = chain_model(c.model, 4, beta);
    Region lam = chain_region(4);
    Lindbladian l = schmidt_generator(lam, p, lam, beta);
    double alpha = mlsi_witness(l, l.sigma, witness_cfg(c, 4)).quantity;
    double eps = c.param("eps", 1e-2);
    auto circ = gibbs_prep_circuit(p, lam, beta, eps, alpha);
    c.metric("gibbs_prep.alpha_witness", alpha);
    c.metric("gibbs_prep.total_time", circ.total_time);
    c.metric("gibbs_prep.steps", circ.steps);
    c.metric("gibbs_prep.depth", circ.depth);
    c.metric("gibbs_prep.distance", circ.distance);
    c.metric("gibbs_prep.splitting_error", circ.splitting_error);
    c.check("gibbs_prep", circ.distance <= eps);
  }
  if (c.want("hypothesis")) {
    GlauberModel g = glauber_model(c.model, 3);
    double alpha = mlsi_witness(g.l, g.sigma, witness_cfg(c, 5)).quantity;
    Mat rho = gibbs_state(g.p, g.lam, 2.0 * beta + 0.2);
    Eig e = herm_eig(g.sigma);
    Vec top = e.vecs.col(e.vals.size() - 1);
    auto r = hypothesis_test_bound(g.sigma, rho, top * top.adjoint(), g.l, alpha, 3, log_grid(1e-3, 10, 40));
    c.metric("hypothesis.gamma", r.gamma);
    c.metric("hypothesis.gamma_norm_bound", r.gamma_norm_bound);
    c.metric("hypothesis.lhs", r.lhs);
    c.metric("hypothesis.rhs", r.rhs);
    c.check("hypothesis", r.holds && r.gamma <= r.gamma_norm_bound);
  }
}

const std::map<std::string, std::function<void(Ctx&)>>& dispatch() {
  static const std::map<std::string, std::function<void(Ctx&)>> d = {
      {"lattice", exp_lattice}, {"gibbs", exp_gibbs},         {"ce-check", exp_ce},
      {"gap", exp_gap},         {"mlsi", exp_mlsi},           {"tensorization", exp_tensorization},
      {"expansion", exp_expansion}, {"clustering", exp_clustering}, {"anneal", exp_anneal},
      {"apps", exp_apps}};
  return d;
}

}  // namespace

Record run_experiment(const ExperimentSpec& e, const ExperimentConfig& cfg) {
  Record rec;
  rec.id = e.id;
  rec.kind = e.kind;
  rec.criterion = e.criterion;
  rec.build = build_id();
  rec.seed = cfg.seed;
  ModelConfig model = e.model.value_or(cfg.model);
  std::vector<std::string> checks = e.checks.empty() ? default_checks(e.kind) : e.checks;
  rec.params = e.params;
  rec.params["model"] = model_to_json(model);
  rec.params["dynamics"] = {{"generator", cfg.dynamics.generator}, {"rate", cfg.dynamics.rate}};
  rec.params["checks"] = checks;
  Ctx ctx{e, cfg, model, std::set<std::string>(checks.begin(), checks.end()), rec};
  try {
    dispatch().at(e.kind)(ctx);
  } catch (const json::exception& ex) {
    throw SchemaError("experiment '" + e.id + "': bad parameter: " + ex.what());
  } catch (const std::exception& ex) {
    throw std::runtime_error("experiment '" + e.id + "' (" + e.kind + "): " + ex.what());
  }
  return rec;
}

std::vector<Record> run(const ExperimentConfig& c, std::ostream* log) {
  std::vector<Record> out;
  for (const auto& e : c.experiments) {
    auto t0 = std::chrono::steady_clock::now();
    out.push_back(run_experiment(e, c));
    if (log) {
      double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      *log << e.id << " (" << e.kind << "): " << (out.back().passed() ? "ok" : "FAILED") << " in " << secs << " s\n";
    }
  }
  return out;
}

}  // namespace qgibbs
