#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "parkline/experiments.hpp"

namespace {

using namespace parkline;

// Flags override the config file, which overrides the experiment defaults.
struct Overrides {
  std::optional<std::string> nu;
  std::optional<double> t_end, half_width, margin;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  unsigned threads = 0;
};

void apply(const Overrides& ov, RunSettings& s) {
  if (ov.nu) s.cfg.nu = parse_measure(*ov.nu);
  if (ov.t_end) s.cfg.t_end = *ov.t_end;
  if (ov.half_width) s.cfg.half_width = *ov.half_width;
  if (ov.margin) s.cfg.margin = *ov.margin;
  if (ov.seed) s.cfg.seed = *ov.seed;
  if (ov.replicas) s.replicas = *ov.replicas;
  s.threads = ov.threads;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

void write_plots(const std::string& dir, const std::string& experiment,
                 const std::vector<PlotTable>& tables) {
  std::filesystem::create_directories(dir);
  for (const auto& t : tables) {
    std::filesystem::path p = std::filesystem::path(dir) / (experiment + "-" + t.name + ".tsv");
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << render_plot_table(t);
  }
}

std::string csv_payload(const ExperimentOutcome& o) {
  std::string text = kJumpLogCsvHeader;
  text += '\n';
  for (const auto& row : o.csv_rows) {
    text += row;
    text += '\n';
  }
  return text;
}

int run_one(const ExperimentDef& def, RunSettings s, const std::string& out_path,
            const std::string& format, const std::string& plot_dir) {
  s.collect_jump_log = format == "csv";
  ExperimentRun run = run_experiment(def, s);
  if (format == "csv")
    write_text(out_path, csv_payload(run.outcome));
  else
    write_text(out_path, run.report.dump(2) + "\n");
  if (!plot_dir.empty()) write_plots(plot_dir, def.name, run.outcome.plots);
  return run.outcome.pass() ? 0 : 1;
}

int run_all(std::optional<std::uint64_t> seed, unsigned threads,
            const std::string& out_path) {
  nlohmann::ordered_json all = nlohmann::ordered_json::array();
  bool ok = true;
  for (const auto& def : registry()) {
    RunSettings s = def.defaults;
    if (seed) s.cfg.seed = *seed;
    s.threads = threads;
    ExperimentRun run = run_experiment(def, s);
    bool pass = run.outcome.pass();
    ok = ok && pass;
    std::fprintf(stderr, "[%s] %-22s %5.1fs\n", pass ? "PASS" : "FAIL", def.name.c_str(),
                 run.seconds);
    all.push_back(std::move(run.report));
  }
  write_text(out_path, all.dump(2) + "\n");
  return ok ? 0 : 1;
}

int trace_replica(const ExperimentDef& def, RunSettings s, std::size_t index,
                  const std::string& out_path) {
  validate_config(s.cfg);
  SimConfig cfg = s.cfg;
  cfg.seed = replica_seed(experiment_master_seed(s.cfg.seed, def.name), index);
  SimResult r = run(cfg);
  write_text(out_path, to_json(r).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Monte Carlo and analytic verification of the continuous parking process: "
      "block growth around the origin, jump laws, and ladder-exponent identities"};
  app.set_help_flag("--help", "print usage");

  std::string experiment, config_path, out_path, plot_dir;
  std::string format = "json";
  bool list = false, verify_all = false;
  long long trace_index = -1;
  Overrides ov;

  app.add_flag("--list", list, "list the experiment catalog and exit");
  app.add_option("--experiment", experiment, "run one experiment by name");
  app.add_flag("--verify-all", verify_all, "run every experiment with its defaults");
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--nu", ov.nu,
                 "file-length law: dirac:a | exp:rate | gamma:shape,scale | "
                 "discrete:s1=w1,s2=w2,...");
  app.add_option("--t-end", ov.t_end, "simulated horizon, must stay below 1/m");
  app.add_option("--half-width", ov.half_width, "window half-width W");
  app.add_option("--margin", ov.margin, "discard margin inside the window");
  app.add_option("--replicas", ov.replicas, "number of independent replicas");
  app.add_option("--seed", ov.seed, "master seed");
  app.add_option("--threads", ov.threads, "worker threads (0 = hardware default)");
  app.add_option("--out", out_path, "output path (default stdout)");
  app.add_option("--format", format, "report format: json or csv (pooled jump log)")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--plot", plot_dir, "directory for (x, empirical, theoretical) tables");
  app.add_option("--trace-replica", trace_index,
                 "emit one replica's full trajectory as JSON instead of running checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (list) {
      for (const auto& def : registry())
        std::printf("%-22s replicas=%-6zu nu=%-10s t_end=%g\n    %s\n", def.name.c_str(),
                    def.defaults.replicas, format_measure(def.defaults.cfg.nu).c_str(),
                    def.defaults.cfg.t_end, def.law.c_str());
      return 0;
    }
    if (verify_all != experiment.empty())
      throw ConfigError("pick exactly one of --experiment NAME or --verify-all");
    if (verify_all) {
      if (ov.nu || ov.t_end || ov.half_width || ov.margin || ov.replicas ||
          !config_path.empty())
        throw ConfigError("--verify-all runs each suite with its own defaults; "
                          "only --seed and --threads apply");
      return run_all(ov.seed, ov.threads, out_path);
    }
    const ExperimentDef* def = find_experiment(experiment);
    if (!def) throw ConfigError("unknown experiment: " + experiment);
    RunSettings s = def->defaults;
    if (!config_path.empty()) apply_config_file(config_path, s);
    apply(ov, s);
    if (trace_index >= 0)
      return trace_replica(*def, s, static_cast<std::size_t>(trace_index), out_path);
    return run_one(*def, s, out_path, format, plot_dir);
  } catch (const WindowDiscardRateExceeded& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
