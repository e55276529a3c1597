// Command-line front end: run an engine, audit or compare tubes, sweep μ, plot.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "reach/harness/artifact.hpp"
#include "reach/harness/commands.hpp"
#include "reach/harness/plot.hpp"
#include "reach/harness/run_config.hpp"

namespace fs = std::filesystem;
using namespace reach::harness;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> artifacts;
  std::size_t trials = 10000;
  std::vector<double> mus{1.05, 1.2, 1.5};
  std::size_t seeds = 5;
  std::string dims = "0,1";
  std::size_t overlay = 0;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw reach::Error("cannot write '" + path.string() + "'");
  os << text;
}

RunConfig load(const Options& o, const std::string& engine) {
  RunConfig c = load_run_config(o.config, engine);
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out_dir = *o.out;
  c.validate();
  return c;
}

int run(const Options& o, const std::string& engine) {
  const RunConfig cfg = load(o, engine);
  const TubeArtifact a = run_engine(cfg);
  const ArtifactPaths p = write_artifact(a, cfg.out_dir, cfg.output_stem());
  std::cout << engine << " " << cfg.model << ": " << a.summary.steps << " steps to t=" << a.summary.final_time
            << ", mean volume " << format_volume(a.summary.mean_volume) << ", " << a.runtime_seconds << " s, status "
            << a.summary.status << "\n";
  if (!a.summary.message.empty()) std::cout << "  " << a.summary.message << "\n";
  std::cout << "  wrote " << p.tube.string() << ", " << p.summary.string() << ", " << p.csv.string() << "\n";
  return exit_code(a);
}

int run_audit(const Options& o) {
  const TubeArtifact a = read_artifact(o.artifacts.at(0));
  const AuditResult r = audit(a, o.trials, o.seed.value_or(0x5eed));
  std::cout << r.text;
  fs::path out = o.out ? fs::path(*o.out) : artifact_paths(o.artifacts.at(0)).tube;
  if (!o.out) out.replace_extension(".audit.json");
  write_file(out, r.report.dump(2) + "\n");
  std::cout << "  wrote " << out.string() << "\n";
  return r.ok ? 0 : 1;
}

int run_compare(const Options& o) {
  std::vector<TubeArtifact> runs;
  for (const auto& path : o.artifacts) runs.push_back(read_artifact(path));
  const Comparison c = compare(runs);
  std::cout << c.text;
  if (o.out) {
    write_file(*o.out, c.data.dump(2) + "\n");
    std::cout << "  wrote " << *o.out << "\n";
  }
  return 0;
}

int run_pareto(const Options& o) {
  const RunConfig cfg = load(o, "gotube");
  std::vector<std::uint64_t> seeds;
  for (std::size_t k = 0; k < o.seeds; ++k) seeds.push_back(cfg.seed + k);
  const ParetoResult r = pareto(cfg, o.mus, seeds);
  const fs::path dir = o.out ? fs::path(*o.out) : fs::path(cfg.out_dir);
  const std::string stem = cfg.output_stem() + "_pareto";
  write_file(dir / (stem + ".json"), pareto_json(r).dump(2) + "\n");
  std::cout << "mu        runtime_s   volume      normalized  samples\n";
  for (const auto& p : r.points) {
    std::printf("%-9g %-11.3f %-11.3e %-11.4g %g\n", p.mu, p.runtime, p.volume, p.normalized_volume, p.samples);
  }
  if (!r.points.empty()) write_file(dir / (stem + ".svg"), plot_pareto(r));
  std::cout << "  wrote " << (dir / (stem + ".json")).string() << "\n";
  if (!r.complete) {
    std::cerr << "pareto: incomplete curve: " << r.message << "\n";
    return 1;
  }
  return 0;
}

int run_plot(const Options& o) {
  const TubeArtifact a = read_artifact(o.artifacts.at(0));
  const auto comma = o.dims.find(',');
  if (comma == std::string::npos) throw reach::InvalidInput("--dims expects 'i,j'");
  const int i = std::stoi(o.dims.substr(0, comma));
  const int j = std::stoi(o.dims.substr(comma + 1));
  const std::string svg = plot_tube(a, i, j, o.overlay, o.seed.value_or(1));
  fs::path out = o.out ? fs::path(*o.out) : artifact_paths(o.artifacts.at(0)).tube;
  if (!o.out) out.replace_extension(".svg");
  write_file(out, svg);
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reachtubes for nonlinear ODEs: deterministic (lrtng) and statistical (gotube, slr)"};
  app.set_version_flag("--version", std::string(version_string()));
  app.require_subcommand(1);
  Options o;

  for (const char* engine : {"lrtng", "gotube", "slr"}) {
    auto* sub = app.add_subcommand(engine, std::string("Build a reachtube with ") + engine);
    sub->add_option("--config", o.config, "Run config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Override the sampling seed");
    sub->add_option("--out", o.out, "Output directory");
  }
  auto* audit_cmd = app.add_subcommand("audit", "Check a tube against fresh sample trajectories");
  audit_cmd->add_option("artifact", o.artifacts, "Tube artifact (.tube, .summary or stem)")->required()->expected(1);
  audit_cmd->add_option("--trials", o.trials, "Number of fresh trajectories");
  audit_cmd->add_option("--seed", o.seed, "Audit seed");
  audit_cmd->add_option("--out", o.out, "Report file (default <stem>.audit.json)");

  auto* compare_cmd = app.add_subcommand("compare", "Volume, runtime and horizon table over runs of one problem");
  compare_cmd->add_option("artifacts", o.artifacts, "Tube artifacts")->required()->expected(2, 64);
  compare_cmd->add_option("--out", o.out, "Write the structured table to this JSON file");

  auto* pareto_cmd = app.add_subcommand("pareto", "GoTube runtime and volume as functions of mu");
  pareto_cmd->add_option("--config", o.config, "Run config file")->required()->check(CLI::ExistingFile);
  pareto_cmd->add_option("--mu", o.mus, "Ascending mu values")->delimiter(',');
  pareto_cmd->add_option("--seeds", o.seeds, "Seeds per mu (median is reported)");
  pareto_cmd->add_option("--seed", o.seed, "First seed");
  pareto_cmd->add_option("--out", o.out, "Output directory");

  auto* plot_cmd = app.add_subcommand("plot", "SVG projection of a tube");
  plot_cmd->add_option("artifact", o.artifacts, "Tube artifact")->required()->expected(1);
  plot_cmd->add_option("--dims", o.dims, "Projected dimensions 'i,j'");
  plot_cmd->add_option("--overlay-samples", o.overlay, "Number of sampled trajectories to overlay");
  plot_cmd->add_option("--seed", o.seed, "Seed of the overlaid samples");
  plot_cmd->add_option("--out", o.out, "SVG file (default <stem>.svg)");

  CLI11_PARSE(app, argc, argv);

  try {
    for (const char* engine : {"lrtng", "gotube", "slr"}) {
      if (app.got_subcommand(engine)) return run(o, engine);
    }
    if (app.got_subcommand("audit")) return run_audit(o);
    if (app.got_subcommand("compare")) return run_compare(o);
    if (app.got_subcommand("pareto")) return run_pareto(o);
    if (app.got_subcommand("plot")) return run_plot(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
