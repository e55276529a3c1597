#pragma once

// Run configuration for the command-line harness.
//
//   [model]
//   model = brusselator
//   params = a=1, b=1.5
//   weights = ../weights/ctrnn8.txt     # ctrnn and linear only, relative to this file
//   [initial_set]
//   x0 = 1 1
//   delta0 = 0.01
//   [engine]
//   engine = lrtng                      # lrtng | gotube | slr
//   T = 5
//   dt = 0.01
//   mu = 1.1
//   gamma = 0.01
//   batch_size = 100
//   max_samples = 20000
//   seed = 1
//   rtol = 1e-9                         # optional integrator settings
//   atol = 1e-9
//   interval_step = 0.01
//   [output]
//   dir = out
//   name = brusselator                  # files are <name>_<engine>.tube etc.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "reach/errors.hpp"
#include "reach/keyvalue.hpp"
#include "reach/lrtng.hpp"
#include "reach/models.hpp"
#include "reach/stochastic.hpp"

namespace reach::harness {

using json = nlohmann::json;

struct RunConfig {
  std::string engine = "lrtng";
  std::string model;
  ParamMap params;
  std::string weights;  // absolute path, empty when unused
  Vec x0;
  double delta0 = 0.0;
  double T = 0.0;
  double dt = 0.0;
  double mu = 1.1;
  double gamma = 0.05;
  std::size_t batch_size = 100;
  std::size_t max_samples = 20000;
  std::uint64_t seed = 1;
  double rtol = 1e-9;
  double atol = 1e-9;
  double interval_step = 0.01;
  std::string out_dir = "out";
  std::string out_name;

  bool stochastic() const { return engine == "gotube" || engine == "slr"; }

  std::string output_stem() const { return (out_name.empty() ? model : out_name) + "_" + engine; }

  VectorFieldPtr field() const { return model_registry(model, params, weights); }

  LrtngConfig lrtng() const {
    LrtngConfig c;
    c.field = field();
    c.x0 = x0;
    c.delta0 = delta0;
    c.horizon = T;
    c.dt = dt;
    c.point = IntegratorConfig::adaptive(rtol, atol);
    c.interval = IntegratorConfig::fixed(interval_step);
    return c;
  }

  StochasticConfig stochastic_config() const {
    StochasticConfig c;
    c.field = field();
    c.x0 = x0;
    c.delta0 = delta0;
    c.horizon = T;
    c.dt = dt;
    c.mu = mu;
    c.gamma = gamma;
    c.batch_size = batch_size;
    c.max_samples = max_samples;
    c.seed = seed;
    c.engine = engine == "slr" ? Engine::slr : Engine::gotube;
    c.point = IntegratorConfig::adaptive(rtol, atol);
    c.interval = IntegratorConfig::fixed(interval_step);
    return c;
  }

  // Checks the fields the selected engine needs and builds the model once.
  void validate() const {
    if (engine != "lrtng" && engine != "gotube" && engine != "slr") {
      throw InvalidInput("unknown engine '" + engine + "'");
    }
    if (stochastic()) {
      stochastic_config().validate();
    } else {
      lrtng().validate();
    }
  }
};

namespace detail {

inline ParamMap parse_params(const std::string& text, const std::string& source, std::size_t line) {
  ParamMap out;
  std::string token;
  std::istringstream in(text);
  while (in >> token) {
    while (!token.empty() && token.back() == ',') token.pop_back();
    if (token.empty()) continue;
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError(source, line, "expected 'name=value' in params, got '" + token + "'");
    const auto v = KvDocument::parse_numbers(token.substr(eq + 1), source, line);
    if (v.size() != 1) throw ParseError(source, line, "expected one number for parameter '" + token.substr(0, eq) + "'");
    if (!out.emplace(token.substr(0, eq), v.front()).second) {
      throw ParseError(source, line, "duplicate parameter '" + token.substr(0, eq) + "'");
    }
  }
  return out;
}

inline std::size_t count_field(const KvDocument& doc, const std::string& section, const std::string& key,
                               std::size_t fallback) {
  const long long v = doc.integer_or(section, key, static_cast<long long>(fallback));
  if (v < 0) throw ParseError(doc.source(), doc.line_of(section, key), "'" + key + "' must be nonnegative");
  return static_cast<std::size_t>(v);
}

}  // namespace detail

// Parses a run config. `engine_override` replaces the [engine] engine field (the CLI
// subcommand); relative weight paths resolve against the config file's directory.
inline RunConfig parse_run_config(const KvDocument& doc, const std::optional<std::string>& engine_override = {}) {
  for (const auto& s : doc.section_names()) {
    if (s.empty()) {
      if (!doc.section("").empty()) throw ParseError(doc.source(), doc.section("").begin()->second.line, "key outside any section");
      continue;
    }
    if (s != "model" && s != "initial_set" && s != "engine" && s != "output") {
      throw ParseError(doc.source(), 0, "unknown section [" + s + "]");
    }
  }
  static const std::map<std::string, std::vector<std::string>> known = {
      {"model", {"model", "params", "weights"}},
      {"initial_set", {"x0", "delta0"}},
      {"engine",
       {"engine", "T", "dt", "mu", "gamma", "batch_size", "max_samples", "seed", "rtol", "atol", "interval_step"}},
      {"output", {"dir", "name"}}};
  for (const auto& [section, keys] : known) {
    if (!doc.has_section(section)) continue;
    for (const auto& [key, entry] : doc.section(section)) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ParseError(doc.source(), entry.line, "unknown key '" + key + "' in [" + section + "]");
      }
    }
  }

  RunConfig c;
  c.model = doc.string("model", "model");
  if (doc.has("model", "params")) {
    c.params = detail::parse_params(doc.string("model", "params"), doc.source(), doc.line_of("model", "params"));
  }
  if (doc.has("model", "weights")) {
    std::filesystem::path p = doc.string("model", "weights");
    if (p.is_relative()) p = std::filesystem::path(doc.source()).parent_path() / p;
    std::error_code ec;
    const auto resolved = std::filesystem::weakly_canonical(p, ec);
    if (ec || !std::filesystem::is_regular_file(resolved)) {
      throw ParseError(doc.source(), doc.line_of("model", "weights"), "weights file '" + p.string() + "' not found");
    }
    c.weights = resolved.string();
  }

  const auto x0 = doc.numbers("initial_set", "x0");
  c.x0 = Eigen::Map<const Vec>(x0.data(), static_cast<Eigen::Index>(x0.size()));
  c.delta0 = doc.number("initial_set", "delta0");

  c.engine = engine_override ? *engine_override : doc.string_or("engine", "engine", "lrtng");
  c.T = doc.number("engine", "T");
  c.dt = doc.number("engine", "dt");
  c.rtol = doc.number_or("engine", "rtol", c.rtol);
  c.atol = doc.number_or("engine", "atol", c.atol);
  c.interval_step = doc.number_or("engine", "interval_step", c.interval_step);
  if (c.stochastic()) {
    // Required for the statistical engines; missing keys report the section.
    c.mu = doc.number("engine", "mu");
    c.gamma = doc.number("engine", "gamma");
  } else {
    c.mu = doc.number_or("engine", "mu", c.mu);
    c.gamma = doc.number_or("engine", "gamma", c.gamma);
  }
  c.batch_size = detail::count_field(doc, "engine", "batch_size", c.batch_size);
  c.max_samples = detail::count_field(doc, "engine", "max_samples", c.max_samples);
  c.seed = static_cast<std::uint64_t>(detail::count_field(doc, "engine", "seed", c.seed));

  c.out_dir = doc.string_or("output", "dir", c.out_dir);
  c.out_name = doc.string_or("output", "name", "");
  c.validate();
  return c;
}

inline RunConfig load_run_config(const std::string& path, const std::optional<std::string>& engine_override = {}) {
  return parse_run_config(KvDocument::load(path), engine_override);
}

// Semantic content of a config: everything that influences the tube, in a fixed key
// order (json objects are sorted), independent of file layout and output paths.
inline json to_json(const RunConfig& c) {
  json j;
  j["engine"] = c.engine;
  j["model"] = c.model;
  j["params"] = json::object();
  for (const auto& [k, v] : c.params) j["params"][k] = v;
  j["weights"] = c.weights;
  j["x0"] = std::vector<double>(c.x0.data(), c.x0.data() + c.x0.size());
  j["delta0"] = c.delta0;
  j["T"] = c.T;
  j["dt"] = c.dt;
  j["rtol"] = c.rtol;
  j["atol"] = c.atol;
  j["interval_step"] = c.interval_step;
  if (c.stochastic()) {
    j["mu"] = c.mu;
    j["gamma"] = c.gamma;
    j["batch_size"] = c.batch_size;
    j["max_samples"] = c.max_samples;
    j["seed"] = c.seed;
  }
  return j;
}

inline RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  c.engine = j.at("engine").get<std::string>();
  c.model = j.at("model").get<std::string>();
  for (const auto& [k, v] : j.at("params").items()) c.params[k] = v.get<double>();
  c.weights = j.at("weights").get<std::string>();
  const auto x0 = j.at("x0").get<std::vector<double>>();
  c.x0 = Eigen::Map<const Vec>(x0.data(), static_cast<Eigen::Index>(x0.size()));
  c.delta0 = j.at("delta0").get<double>();
  c.T = j.at("T").get<double>();
  c.dt = j.at("dt").get<double>();
  c.rtol = j.at("rtol").get<double>();
  c.atol = j.at("atol").get<double>();
  c.interval_step = j.at("interval_step").get<double>();
  if (c.stochastic()) {
    c.mu = j.at("mu").get<double>();
    c.gamma = j.at("gamma").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.max_samples = j.at("max_samples").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  return c;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const RunConfig& c) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a64(to_json(c).dump());
  return os.str();
}

// The fields two runs must share to be compared: model, parameters, initial set, horizon.
inline json problem_key(const RunConfig& c) {
  json j = to_json(c);
  json out;
  for (const char* k : {"model", "params", "weights", "x0", "delta0", "T", "dt"}) out[k] = j[k];
  return out;
}

}  // namespace reach::harness
