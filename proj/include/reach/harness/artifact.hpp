#pragma once

// Tube artifacts: `<stem>.tube` holds one JSON record per step, `<stem>.summary` the
// metadata and aggregate volume, `<stem>.csv` a flat (t, center, radius, volume) export.
// Doubles are written in shortest round-trip form, so re-reading is bit-exact.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "reach/harness/run_config.hpp"
#include "reach/lrtng.hpp"
#include "reach/stochastic.hpp"

#ifndef REACH_VERSION
#define REACH_VERSION "0.1.0"
#endif

namespace reach::harness {

inline const char* version_string() { return REACH_VERSION; }

struct TubeSummary {
  double mean_volume = 0.0;
  double final_time = 0.0;
  bool blowup = false;
  std::string status = "ok";  // ok | blowup | confidence_timeout
  std::string message;
  std::size_t steps = 0;
};

struct TubeArtifact {
  std::string engine;
  RunConfig config;
  std::string config_hash;
  std::string version = version_string();
  double runtime_seconds = 0.0;
  std::vector<LrtngStep> lrtng_steps;
  std::vector<StochasticStep> stochastic_steps;
  TubeSummary summary;

  bool stochastic() const { return engine != "lrtng"; }
  std::size_t size() const { return stochastic() ? stochastic_steps.size() : lrtng_steps.size(); }
  double time(std::size_t j) const { return stochastic() ? stochastic_steps[j].time : lrtng_steps[j].time; }
  const Vec& center(std::size_t j) const { return stochastic() ? stochastic_steps[j].center : lrtng_steps[j].center; }
  double step_volume(std::size_t j) const {
    if (stochastic()) {
      const auto& s = stochastic_steps[j];
      return ball_volume(static_cast<int>(s.center.size()), s.radius);
    }
    return lrtng_steps[j].box.volume();
  }
  const char* volume_convention() const {
    return stochastic() ? "mean over steps of the Euclidean ball volume"
                        : "mean over steps of the intersection box volume";
  }
};

namespace detail {

inline json real(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double real_from(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ParseError("artifact", 0, "bad real '" + s + "'");
  }
  return j.get<double>();
}

inline json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vec vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline json mat_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

inline Mat mat_from(const json& j) {
  const auto rows = j.size();
  const auto cols = rows == 0 ? 0 : j[0].size();
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < cols; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
  return m;
}

inline json ivec_json(const IVector& x) {
  json lo = json::array();
  json hi = json::array();
  for (const auto& iv : x) {
    lo.push_back(iv.lo());
    hi.push_back(iv.hi());
  }
  return {{"lo", lo}, {"hi", hi}};
}

inline IVector ivec_from(const json& j) {
  const auto lo = j.at("lo").get<std::vector<double>>();
  const auto hi = j.at("hi").get<std::vector<double>>();
  if (lo.size() != hi.size()) throw ParseError("artifact", 0, "interval vector bounds differ in length");
  IVector out(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) out[i] = Interval(lo[i], hi[i]);
  return out;
}

inline json imat_json(const IMatrix& m) {
  Mat lo(m.rows(), m.cols());
  Mat hi(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t k = 0; k < m.cols(); ++k) {
      lo(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = m(i, k).lo();
      hi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = m(i, k).hi();
    }
  return {{"lo", mat_json(lo)}, {"hi", mat_json(hi)}};
}

inline IMatrix imat_from(const json& j) { return IMatrix::from_bounds(mat_from(j.at("lo")), mat_from(j.at("hi"))); }

}  // namespace detail

inline json step_json(const LrtngStep& s) {
  using namespace detail;
  return {{"t", s.time},
          {"center", vec_json(s.center)},
          {"metric_factor", mat_json(s.ellipsoid.metric.factor())},
          {"ellipsoid_radius", s.ellipsoid.radius},
          {"ball_radius", s.euclid_ball.radius},
          {"box", ivec_json(s.box.intervals)},
          {"gradient", imat_json(s.gradient_enclosure)},
          {"lambda_metric", s.lambda_metric},
          {"lambda_euclid", s.lambda_euclid},
          {"metric_fallback", s.metric_fallback},
          {"volume", s.box.volume()}};
}

inline LrtngStep lrtng_step_from(const json& j) {
  using namespace detail;
  LrtngStep s;
  s.time = j.at("t").get<double>();
  s.center = vec_from(j.at("center"));
  s.ellipsoid = Ellipsoid{s.center, Metric::from_factor(mat_from(j.at("metric_factor"))), j.at("ellipsoid_radius").get<double>()};
  s.euclid_ball = Ellipsoid::ball(s.center, j.at("ball_radius").get<double>());
  s.box = Box{ivec_from(j.at("box"))};
  s.gradient_enclosure = imat_from(j.at("gradient"));
  s.lambda_metric = j.at("lambda_metric").get<double>();
  s.lambda_euclid = j.at("lambda_euclid").get<double>();
  s.metric_fallback = j.at("metric_fallback").get<bool>();
  return s;
}

inline json step_json(const StochasticStep& s) {
  using namespace detail;
  json trace = json::array();
  for (double p : s.confidence_trace) trace.push_back(real(p));
  return {{"t", s.time},
          {"center", vec_json(s.center)},
          {"radius", s.radius},
          {"m_bar", s.m_bar},
          {"confidence", s.achieved_confidence},
          {"samples", s.samples_used},
          {"delta_lambda", real(s.delta_lambda)},
          {"min_cap", real(s.min_cap)},
          {"max_cap", real(s.max_cap)},
          {"confidence_trace", trace},
          {"volume", ball_volume(static_cast<int>(s.center.size()), s.radius)}};
}

inline StochasticStep stochastic_step_from(const json& j) {
  using namespace detail;
  StochasticStep s;
  s.time = j.at("t").get<double>();
  s.center = vec_from(j.at("center"));
  s.radius = j.at("radius").get<double>();
  s.m_bar = j.at("m_bar").get<double>();
  s.achieved_confidence = j.at("confidence").get<double>();
  s.samples_used = j.at("samples").get<std::size_t>();
  s.delta_lambda = real_from(j.at("delta_lambda"));
  s.min_cap = real_from(j.at("min_cap"));
  s.max_cap = real_from(j.at("max_cap"));
  for (const auto& p : j.at("confidence_trace")) s.confidence_trace.push_back(real_from(p));
  return s;
}

inline TubeSummary summarize(const TubeArtifact& a) {
  TubeSummary s = a.summary;
  s.steps = a.size();
  double total = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) total += a.step_volume(j);
  s.mean_volume = a.size() == 0 ? 0.0 : total / static_cast<double>(a.size());
  s.final_time = a.size() == 0 ? a.config.T : a.time(a.size() - 1);
  s.blowup = s.status == "blowup";
  return s;
}

inline TubeArtifact make_artifact(const RunConfig& cfg, std::vector<LrtngStep> steps, const LrtngResult& r,
                                  double runtime) {
  TubeArtifact a;
  a.engine = cfg.engine;
  a.config = cfg;
  a.config_hash = config_hash(cfg);
  a.runtime_seconds = runtime;
  a.lrtng_steps = std::move(steps);
  a.summary.status = r.blowup ? "blowup" : "ok";
  a.summary.message = r.message;
  a.summary = summarize(a);
  return a;
}

inline TubeArtifact make_artifact(const RunConfig& cfg, std::vector<StochasticStep> steps, const StochasticResult& r,
                                  double runtime) {
  TubeArtifact a;
  a.engine = cfg.engine;
  a.config = cfg;
  a.config_hash = config_hash(cfg);
  a.runtime_seconds = runtime;
  a.stochastic_steps = std::move(steps);
  a.summary.status = to_string(r.status);
  a.summary.message = r.message;
  a.summary = summarize(a);
  return a;
}

inline json summary_json(const TubeArtifact& a) {
  return {{"engine", a.engine},
          {"config", to_json(a.config)},
          {"config_hash", a.config_hash},
          {"version", a.version},
          {"runtime_seconds", a.runtime_seconds},
          {"volume_convention", a.volume_convention()},
          {"mean_volume", a.summary.mean_volume},
          {"final_time", a.summary.final_time},
          {"blowup", a.summary.blowup},
          {"status", a.summary.status},
          {"message", a.summary.message},
          {"steps", a.summary.steps}};
}

struct ArtifactPaths {
  std::filesystem::path tube;
  std::filesystem::path summary;
  std::filesystem::path csv;
};

// Accepts the stem or any of the three files.
inline ArtifactPaths artifact_paths(const std::filesystem::path& any) {
  std::filesystem::path stem = any;
  const auto ext = any.extension().string();
  if (ext == ".tube" || ext == ".summary" || ext == ".csv") stem.replace_extension();
  auto with = [&](const char* e) {
    auto p = stem;
    p += e;
    return p;
  };
  return {with(".tube"), with(".summary"), with(".csv")};
}

inline void write_csv(std::ostream& os, const TubeArtifact& a) {
  const auto n = a.config.x0.size();
  os << "t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",c" << i;
  os << (a.stochastic() ? ",radius" : ",ellipsoid_radius,ball_radius") << ",volume\n";
  for (std::size_t j = 0; j < a.size(); ++j) {
    os << json(a.time(j)).dump();
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << json(a.center(j)(i)).dump();
    if (a.stochastic()) {
      os << ',' << json(a.stochastic_steps[j].radius).dump();
    } else {
      os << ',' << json(a.lrtng_steps[j].ellipsoid.radius).dump() << ',' << json(a.lrtng_steps[j].euclid_ball.radius).dump();
    }
    os << ',' << json(a.step_volume(j)).dump() << '\n';
  }
}

// Writes the three files next to each other; returns their paths.
inline ArtifactPaths write_artifact(const TubeArtifact& a, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  const ArtifactPaths p = artifact_paths(dir / stem);
  {
    std::ofstream os(p.tube);
    if (!os) throw Error("cannot write '" + p.tube.string() + "'");
    for (std::size_t j = 0; j < a.size(); ++j) {
      os << (a.stochastic() ? step_json(a.stochastic_steps[j]) : step_json(a.lrtng_steps[j])).dump() << '\n';
    }
  }
  {
    std::ofstream os(p.summary);
    if (!os) throw Error("cannot write '" + p.summary.string() + "'");
    os << summary_json(a).dump(2) << '\n';
  }
  {
    std::ofstream os(p.csv);
    if (!os) throw Error("cannot write '" + p.csv.string() + "'");
    write_csv(os, a);
  }
  return p;
}

inline TubeArtifact read_artifact(const std::filesystem::path& any) {
  const ArtifactPaths p = artifact_paths(any);
  std::ifstream sin(p.summary);
  if (!sin) throw Error("cannot open '" + p.summary.string() + "'");
  json s;
  try {
    s = json::parse(sin);
  } catch (const json::exception& e) {
    throw ParseError(p.summary.string(), 0, e.what());
  }
  TubeArtifact a;
  a.engine = s.at("engine").get<std::string>();
  a.config = run_config_from_json(s.at("config"));
  a.config_hash = s.at("config_hash").get<std::string>();
  a.version = s.at("version").get<std::string>();
  a.runtime_seconds = s.at("runtime_seconds").get<double>();
  a.summary.status = s.at("status").get<std::string>();
  a.summary.message = s.at("message").get<std::string>();

  std::ifstream tin(p.tube);
  if (!tin) throw Error("cannot open '" + p.tube.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(tin, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (a.stochastic()) {
        a.stochastic_steps.push_back(stochastic_step_from(j));
      } else {
        a.lrtng_steps.push_back(lrtng_step_from(j));
      }
    } catch (const json::exception& e) {
      throw ParseError(p.tube.string(), line_no, e.what());
    }
  }
  a.summary = summarize(a);
  return a;
}

}  // namespace reach::harness
