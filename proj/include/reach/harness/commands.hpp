#pragma once

// Harness operations behind the CLI subcommands: run, audit, compare, pareto.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "reach/harness/artifact.hpp"
#include "reach/harness/run_config.hpp"
#include "reach/lrtng.hpp"
#include "reach/stochastic.hpp"

namespace reach::harness {

inline TubeArtifact run_engine(const RunConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  if (cfg.stochastic()) {
    StochasticResult r = stochastic_run(cfg.stochastic_config());
    auto steps = std::move(r.steps);
    return make_artifact(cfg, std::move(steps), r, elapsed());
  }
  LrtngResult r = lrtng_run(cfg.lrtng());
  auto steps = std::move(r.steps);
  return make_artifact(cfg, std::move(steps), r, elapsed());
}

// Exit code convention: 0 ok, 2 blowup, 3 confidence timeout.
inline int exit_code(const TubeArtifact& a) {
  if (a.summary.status == "blowup") return 2;
  if (a.summary.status == "confidence_timeout") return 3;
  return 0;
}

struct AuditResult {
  bool ok = true;
  std::size_t violations = 0;
  json report;
  std::string text;
};

// Fresh-sample indices start far past anything an engine draws.
inline constexpr std::uint64_t kAuditFirstIndex = 1ULL << 40;

inline AuditResult audit(const TubeArtifact& a, std::size_t trials, std::uint64_t seed) {
  if (a.size() == 0) throw InvalidInput("audit: empty artifact");
  AuditResult out;
  std::ostringstream text;
  json steps = json::array();
  if (a.stochastic()) {
    const auto cfg = a.config.stochastic_config();
    const auto maxd = fresh_sample_max_distance(cfg, a.stochastic_steps, trials, seed, kAuditFirstIndex);
    for (std::size_t j = 0; j < maxd.size(); ++j) {
      const auto& st = a.stochastic_steps[j];
      const bool inside = maxd[j] <= st.radius;
      if (!inside) ++out.violations;
      steps.push_back({{"t", st.time}, {"max_distance", maxd[j]}, {"radius", st.radius}, {"contained", inside}});
    }
    text << "audit " << a.engine << ": " << trials << " fresh samples, " << out.violations << " of " << maxd.size()
         << " steps with max distance above the radius\n";
  } else {
    const AuditReport rep = conservativeness_audit(a.lrtng_steps, a.config.lrtng(), trials, seed);
    out.violations = rep.violations();
    for (const auto& s : rep.steps) {
      steps.push_back({{"t", s.time}, {"in_box", s.in_box}, {"in_ellipsoid", s.in_ellipsoid}, {"in_ball", s.in_ball}});
    }
    text << "audit lrtng: " << trials << " trajectories, " << rep.box_violations() << " box misses, "
         << out.violations << " misses over box, ellipsoid and ball\n";
  }
  out.ok = out.violations == 0;
  out.report = {{"engine", a.engine}, {"trials", trials}, {"seed", seed}, {"violations", out.violations},
                {"ok", out.ok}, {"steps", steps}};
  out.text = text.str();
  return out;
}

inline std::string format_volume(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

inline std::string artifact_label(const TubeArtifact& a) {
  if (!a.stochastic()) return a.engine;
  std::ostringstream os;
  os << a.engine << "(gamma=" << a.config.gamma << ",mu=" << a.config.mu << ")";
  return os.str();
}

struct Comparison {
  json data;
  std::string text;
};

// Volume/runtime/horizon table over runs of one problem. Refuses runs of different
// problems, listing the fields that differ.
inline Comparison compare(const std::vector<TubeArtifact>& runs) {
  if (runs.size() < 2) throw InvalidInput("compare: need at least two artifacts");
  const json key = problem_key(runs.front().config);
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const json other = problem_key(runs[i].config);
    if (other == key) continue;
    std::ostringstream diff;
    diff << "compare: artifact " << i << " is for a different problem:";
    for (const auto& [k, v] : key.items()) {
      if (other[k] != v) diff << "\n  " << k << ": " << v.dump() << " vs " << other[k].dump();
    }
    throw InvalidInput(diff.str());
  }

  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    if (!r.summary.blowup) best = std::min(best, r.summary.mean_volume);
  }
  std::size_t winners = 0;
  for (const auto& r : runs) winners += !r.summary.blowup && r.summary.mean_volume == best;

  json cols = json::array();
  std::ostringstream text;
  text << std::left << std::setw(34) << "method" << std::setw(12) << "volume" << std::setw(12) << "runtime_s"
       << std::setw(10) << "reached" << "status\n";
  for (const auto& r : runs) {
    const bool smallest = !r.summary.blowup && r.summary.mean_volume == best;
    const std::string vol = r.summary.blowup ? "Blowup" : format_volume(r.summary.mean_volume);
    cols.push_back({{"method", artifact_label(r)},
                    {"engine", r.engine},
                    {"volume", r.summary.blowup ? json("Blowup") : json(r.summary.mean_volume)},
                    {"runtime_seconds", r.runtime_seconds},
                    {"final_time", r.summary.final_time},
                    {"status", r.summary.status},
                    {"smallest", smallest},
                    {"tie", smallest && winners > 1}});
    std::ostringstream rt;
    rt << std::fixed << std::setprecision(2) << r.runtime_seconds;
    std::ostringstream ft;
    ft << r.summary.final_time;
    text << std::left << std::setw(34) << artifact_label(r) << std::setw(12) << (vol + (smallest ? "*" : ""))
         << std::setw(12) << rt.str() << std::setw(10) << ft.str() << r.summary.status << "\n";
  }
  text << "(* smallest volume" << (winners > 1 ? ", tie" : "") << ")\n";
  return {{{"problem", key}, {"columns", cols}}, text.str()};
}

struct ParetoPoint {
  double mu = 0.0;
  double runtime = 0.0;  // median over seeds, seconds
  double volume = 0.0;   // median over seeds
  double normalized_volume = 0.0;
  double samples = 0.0;  // median over seeds of the largest per-step sample count
  std::vector<double> runtimes;
  std::vector<double> volumes;
};

struct ParetoResult {
  std::vector<ParetoPoint> points;
  bool complete = true;
  std::string message;
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw InvalidInput("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 == 1 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

// Runs GoTube for each μ and seed; volumes are normalized by the lowest-μ volume.
inline ParetoResult pareto(RunConfig tmpl, const std::vector<double>& mus, const std::vector<std::uint64_t>& seeds) {
  if (mus.empty() || seeds.empty()) throw InvalidInput("pareto: need at least one mu and one seed");
  for (std::size_t i = 0; i < mus.size(); ++i) {
    if (!(mus[i] > 1.0)) throw InvalidInput("pareto: mu values must exceed 1");
    if (i > 0 && !(mus[i] > mus[i - 1])) throw InvalidInput("pareto: mu values must be ascending");
  }
  tmpl.engine = "gotube";
  ParetoResult out;
  for (double mu : mus) {
    ParetoPoint pt;
    pt.mu = mu;
    std::vector<double> samples;
    for (auto seed : seeds) {
      RunConfig c = tmpl;
      c.mu = mu;
      c.seed = seed;
      const TubeArtifact a = run_engine(c);
      if (a.summary.status != "ok") {
        out.complete = false;
        out.message = "mu=" + std::to_string(mu) + " seed=" + std::to_string(seed) + ": " + a.summary.status + " " +
                      a.summary.message;
        return out;
      }
      pt.runtimes.push_back(a.runtime_seconds);
      pt.volumes.push_back(a.summary.mean_volume);
      std::size_t most = 0;
      for (const auto& s : a.stochastic_steps) most = std::max(most, s.samples_used);
      samples.push_back(static_cast<double>(most));
    }
    pt.runtime = median(pt.runtimes);
    pt.volume = median(pt.volumes);
    pt.samples = median(samples);
    pt.normalized_volume = pt.volume / (out.points.empty() ? pt.volume : out.points.front().volume);
    out.points.push_back(std::move(pt));
  }
  return out;
}

inline json pareto_json(const ParetoResult& r) {
  json pts = json::array();
  for (const auto& p : r.points) {
    pts.push_back({{"mu", p.mu},
                   {"runtime_seconds", p.runtime},
                   {"volume", p.volume},
                   {"normalized_volume", p.normalized_volume},
                   {"samples", p.samples},
                   {"runtimes", p.runtimes},
                   {"volumes", p.volumes}});
  }
  return {{"points", pts}, {"complete", r.complete}, {"message", r.message}};
}

}  // namespace reach::harness
