#pragma once

#include <fstream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mntest/errors.hpp"
#include "mntest/format.hpp"
#include "mntest/simlab.hpp"

namespace mntest {

// JSON schema for experiment configs. A file holds either one experiment
// object or {"name": ..., "defaults": {...}, "experiments": [...]}, where each
// experiment is merged over the defaults key by key.
//
//   {
//     "name": "table3_m100",
//     "scenario_null": {"generator": "zipf", "gamma": 0.45, "k": 1000, "n1": 500, "n2": 500},
//     "scenario_alt":  {"generator": "swap", "i": 1, "j": 100,
//                       "base": {"generator": "zipf", "gamma": 0.45},
//                       "k": 1000, "n1": 500, "n2": 500},
//     "methods": ["proposed", "bs", "zelterman"],
//     "reps": 10000, "alpha": 0.05, "seed": 1, "threads": 1,
//     "permutations": 2000, "cell_rule": "expected", "zelterman_moments": "permutation",
//     "reference": {"proposed": 0.292}
//   }

using nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
  }
}

inline std::size_t get_index(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned()) {
    throw ConfigError(where + ": '" + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

inline const char* generator_name(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::uniform: return "uniform";
    case GeneratorKind::zipf: return "zipf";
    case GeneratorKind::swap: return "swap";
    case GeneratorKind::spike_merge: return "spike_merge";
    case GeneratorKind::zero_renorm: return "zero_renorm";
  }
  return "?";
}

inline GeneratorSpec generator_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::string kind = j.at("generator").get<std::string>();
  GeneratorSpec g;
  if (kind == "uniform") {
    g = GeneratorSpec::uniform();
  } else if (kind == "zipf") {
    g = GeneratorSpec::zipf(j.at("gamma").get<double>());
  } else if (kind == "swap") {
    g = GeneratorSpec::swap(generator_from_json(j.at("base"), where + ".base"),
                            get_index(j, "i", where), get_index(j, "j", where));
  } else if (kind == "spike_merge") {
    g = GeneratorSpec::spike(get_index(j, "b", where));
  } else if (kind == "zero_renorm") {
    g = GeneratorSpec::zero(get_index(j, "b", where));
  } else {
    throw ConfigError(where + ": unknown generator '" + kind + "'");
  }
  return g;
}

inline json generator_to_json(const GeneratorSpec& g) {
  json j = {{"generator", generator_name(g.kind)}};
  switch (g.kind) {
    case GeneratorKind::zipf: j["gamma"] = json_number(g.gamma); break;
    case GeneratorKind::spike_merge:
    case GeneratorKind::zero_renorm: j["b"] = g.b; break;
    case GeneratorKind::swap:
      j["i"] = g.swap_i;
      j["j"] = g.swap_j;
      j["base"] = generator_to_json(*g.base);
      break;
    case GeneratorKind::uniform: break;
  }
  return j;
}

inline ScenarioSpec scenario_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"generator", "gamma", "b", "i", "j", "base", "k", "n1", "n2"}, where);
  ScenarioSpec s;
  s.generator = generator_from_json(j, where);
  s.k = get_index(j, "k", where);
  s.n1 = j.at("n1").get<Count>();
  s.n2 = j.at("n2").get<Count>();
  return s;
}

inline json scenario_to_json(const ScenarioSpec& s) {
  json j = generator_to_json(s.generator);
  j["k"] = s.k;
  j["n1"] = s.n1;
  j["n2"] = s.n2;
  return j;
}

}  // namespace detail

inline ExperimentConfig experiment_from_json(const json& j) {
  const std::string where = j.contains("name") && j["name"].is_string()
                                ? "experiment '" + j["name"].get<std::string>() + "'"
                                : std::string("experiment");
  try {
    detail::reject_unknown_keys(j,
                                {"name", "scenario_null", "scenario_alt", "methods", "reps",
                                 "alpha", "seed", "threads", "permutations", "cell_rule",
                                 "zelterman_moments", "reference"},
                                where);
    ExperimentConfig c;
    c.name = j.value("name", std::string());
    c.scenario_null = detail::scenario_from_json(j.at("scenario_null"), where + ".scenario_null");
    if (j.contains("scenario_alt") && !j["scenario_alt"].is_null()) {
      c.scenario_alt = detail::scenario_from_json(j["scenario_alt"], where + ".scenario_alt");
    }
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j["methods"]) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    c.reps = j.value("reps", c.reps);
    c.alpha = j.value("alpha", c.alpha);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.permutations = j.value("permutations", c.permutations);
    if (j.contains("cell_rule")) c.cell_rule = parse_cell_rule(j["cell_rule"].get<std::string>());
    if (j.contains("zelterman_moments")) {
      c.zelterman_moments = parse_zelterman_moments(j["zelterman_moments"].get<std::string>());
    }
    if (j.contains("reference")) c.reference = j["reference"].get<std::map<std::string, double>>();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

/// Config echo. The thread count is left out on purpose: it must not change
/// report bytes.
inline json experiment_to_json(const ExperimentConfig& c) {
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(method_name(m));
  json j = {{"name", c.name},
            {"scenario_null", detail::scenario_to_json(c.scenario_null)},
            {"scenario_alt", c.scenario_alt ? detail::scenario_to_json(*c.scenario_alt) : json()},
            {"methods", methods},
            {"reps", c.reps},
            {"alpha", json_number(c.alpha)},
            {"seed", c.seed},
            {"permutations", c.permutations},
            {"cell_rule", c.cell_rule == CellRule::expected_positive ? "expected" : "observed"},
            {"zelterman_moments",
             c.zelterman_moments == ZeltermanMoments::permutation ? "permutation" : "exact"}};
  if (!c.reference.empty()) {
    json ref = json::object();
    for (const auto& [k, v] : c.reference) ref[k] = json_number(v);
    j["reference"] = ref;
  }
  return j;
}

/// All experiments in a config document, defaults merged in.
inline std::vector<ExperimentConfig> experiments_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (!doc.contains("experiments")) return {experiment_from_json(doc)};
  detail::reject_unknown_keys(doc, {"name", "defaults", "experiments"}, "config");
  const json defaults = doc.value("defaults", json::object());
  if (!defaults.is_object()) throw ConfigError("config.defaults must be an object");
  const auto& list = doc["experiments"];
  if (!list.is_array() || list.empty()) throw ConfigError("config.experiments must be a nonempty array");
  std::vector<ExperimentConfig> out;
  for (const auto& e : list) {
    if (!e.is_object()) throw ConfigError("each experiment must be an object");
    json merged = defaults;
    merged.update(e);
    out.push_back(experiment_from_json(merged));
  }
  return out;
}

inline std::vector<ExperimentConfig> read_experiments_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return experiments_from_json(doc);
}

inline json report_to_json(const ExperimentReport& r, bool include_timing = false) {
  json results = json::array();
  for (const auto& m : r.results) {
    json e = {{"method", method_name(m.method)},
              {"rate", json_number(m.rate)},
              {"mc_standard_error", json_number(m.mc_standard_error)},
              {"rejections", m.rejections},
              {"degenerate", m.degenerate}};
    if (m.reference) e["reference"] = json_number(*m.reference);
    results.push_back(e);
  }
  json j = {{"name", r.config.name},
            {"config", experiment_to_json(r.config)},
            {"reps_completed", r.reps_completed},
            {"results", results}};
  if (include_timing) j["wall_time_seconds"] = json_number(r.wall_time_seconds);
  return j;
}

inline json reports_to_json(const std::vector<ExperimentReport>& reports, bool include_timing = false) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r, include_timing));
  return {{"experiments", arr}};
}

inline void write_reports_csv(std::ostream& out, const std::vector<ExperimentReport>& reports) {
  out << "experiment,method,rate,se,reps\n";
  for (const auto& r : reports) {
    for (const auto& m : r.results) {
      out << r.config.name << ',' << method_name(m.method) << ',' << format_number(m.rate) << ','
          << format_number(m.mc_standard_error) << ',' << r.reps_completed << '\n';
    }
  }
}

}  // namespace mntest
