// Command-line front end: run, crossdomain, probe, demo.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mrtf/core/error.hpp"
#include "mrtf/diag/ensemble_demo.hpp"
#include "mrtf/diag/probe.hpp"
#include "mrtf/fed/engine.hpp"
#include "mrtf/fed/scenario.hpp"
#include "mrtf/io/config_file.hpp"
#include "mrtf/io/manifest.hpp"
#include "mrtf/io/model_file.hpp"
#include "mrtf/io/reports.hpp"
#include "mrtf/refinery/teachers.hpp"
#include "mrtf/simd/kernels.hpp"

namespace fs = std::filesystem;
using namespace mrtf;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string manifest_path;
  std::optional<std::uint64_t> seed;
  std::string strategy;
  std::string out_dir;
  std::size_t threads = 1;
  bool dump_targets = false;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_strategy) {
  cmd->add_option("--config", args.config_path, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--manifest", args.manifest_path, "replay the config recorded in a manifest.json")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "experiment seed");
  if (with_strategy) cmd->add_option("--strategy", args.strategy, "fedavg, feddf or mrtf");
  cmd->add_option("--out-dir", args.out_dir, "output directory (default: $MRTF_OUT_DIR or ./mrtf-out)");
  cmd->add_option("--threads", args.threads, "worker threads for local updates")->check(CLI::PositiveNumber);
  cmd->add_option("--set", args.overrides, "override one config key, key=value (repeatable)");
}

fed::ExperimentConfig resolve_config(const CommonArgs& args) {
  fed::ExperimentConfig config;
  if (!args.manifest_path.empty()) config = io::load_manifest(args.manifest_path).config;
  if (!args.config_path.empty()) config = io::load_config(args.config_path, config);
  for (const auto& entry : args.overrides) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) throw ConfigError(entry, "--set expects key=value");
    io::set_config_value(config, entry.substr(0, eq), entry.substr(eq + 1));
  }
  if (args.seed) config.seed = *args.seed;
  if (!args.strategy.empty()) io::set_config_value(config, "strategy", args.strategy);
  config.validate();
  return config;
}

fs::path output_dir(const CommonArgs& args) {
  if (!args.out_dir.empty()) return args.out_dir;
  if (const char* env = std::getenv("MRTF_OUT_DIR"); env && *env) return env;
  return "mrtf-out";
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValueError("cannot write " + path.string());
  return out;
}

/// One full federated run written to `dir`. Returns the final refined accuracy.
double run_into(const fed::ExperimentConfig& config, const fs::path& dir, const CommonArgs& args) {
  fs::create_directories(dir);
  io::RunManifest manifest;
  manifest.config = config;
  manifest.simd = std::string(simd::isa_name(simd::active_isa()));
  manifest.started_at = io::utc_timestamp();

  const auto scenario = fed::build_scenario(config);
  fed::RunOptions options;
  options.threads = args.threads;
  std::ofstream targets_out;
  if (args.dump_targets) {
    targets_out = open_output(dir / "targets.tsv");
    manifest.outputs["targets"] = (dir / "targets.tsv").string();
    options.on_targets = [&targets_out, first = true](std::size_t round, const refinery::TeacherTargets& t) mutable {
      io::write_targets_tsv(targets_out, round, refinery::source_name(t.source), t.probs, first);
      first = false;
    };
  }
  options.on_round = [](const fed::RoundMetrics& m) {
    std::cerr << "round " << m.round << ": aggregated " << m.acc_aggregated << ", refined " << m.acc_refined
              << ", ensemble " << m.acc_ensemble << '\n';
  };
  const auto result = fed::run_federated(config, scenario.shards, &scenario.pool, scenario.initial, options);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

  {
    auto out = open_output(dir / "metrics.csv");
    io::write_metrics_csv(out, result.rounds);
  }
  io::save_model(dir / "model.bin", result.final_model);
  manifest.outputs["metrics"] = (dir / "metrics.csv").string();
  manifest.outputs["model"] = (dir / "model.bin").string();
  manifest.finished_at = io::utc_timestamp();
  io::save_manifest(dir / "manifest.json", manifest);
  return result.rounds.back().acc_refined;
}

int cmd_run(const CommonArgs& args) {
  const auto config = resolve_config(args);
  const auto dir = output_dir(args);
  const double acc = run_into(config, dir, args);
  std::cout << "final accuracy " << acc << "\nwrote " << (dir / "metrics.csv").string() << '\n';
  return 0;
}

int cmd_crossdomain(const CommonArgs& args, bool identity_shift) {
  auto config = resolve_config(args);
  config.domain_shift = !identity_shift;
  const auto dir = output_dir(args);
  fs::create_directories(dir);
  std::vector<std::pair<std::string, double>> finals;
  for (auto strategy : {fed::Strategy::fedavg, fed::Strategy::feddf, fed::Strategy::mrtf}) {
    config.strategy = strategy;
    const std::string name(fed::strategy_name(strategy));
    std::cerr << "== " << name << '\n';
    finals.emplace_back(name, run_into(config, dir / name, args));
  }
  auto out = open_output(dir / "summary.csv");
  out << "# mrtf-crossdomain v1\n";
  for (std::size_t i = 0; i < finals.size(); ++i) out << (i ? "," : "") << finals[i].first;
  out << '\n';
  for (std::size_t i = 0; i < finals.size(); ++i) out << (i ? "," : "") << io::format_double(finals[i].second);
  out << '\n';
  for (const auto& [name, acc] : finals) std::cout << name << " final accuracy " << acc << '\n';
  return 0;
}

int cmd_probe(const CommonArgs& args) {
  const auto config = resolve_config(args);
  const auto dir = output_dir(args);
  fs::create_directories(dir);
  const auto report = diag::divergence_probe(config);
  auto out = open_output(dir / "probe.csv");
  diag::write_probe_csv(out, report);
  diag::write_probe_csv(std::cout, report);
  return 0;
}

int cmd_demo(const CommonArgs& args, const diag::EnsembleDemoOptions& options) {
  const auto config = resolve_config(args);
  const auto dir = output_dir(args);
  fs::create_directories(dir);
  const auto report = diag::ensemble_demo(config, options);
  auto out = open_output(dir / "demo.txt");
  diag::write_demo_report(out, report);
  diag::write_demo_report(std::cout, report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transductive federated learning simulator"};
  app.require_subcommand(1);

  CommonArgs run_args, cross_args, probe_args, demo_args;
  auto* run = app.add_subcommand("run", "federated training, writes metrics.csv, manifest.json and model.bin");
  add_common(run, run_args, true);
  run->add_flag("--dump-targets", run_args.dump_targets, "write per-round teacher targets to targets.tsv");

  auto* cross = app.add_subcommand("crossdomain", "fedavg, feddf and mrtf with the pool drawn from a shifted domain");
  add_common(cross, cross_args, false);
  cross->add_flag("--dump-targets", cross_args.dump_targets, "write per-round teacher targets");
  bool identity_shift = false;
  cross->add_flag("--identity-shift", identity_shift, "disable the shift (pool from the training domain)");

  auto* probe = app.add_subcommand("probe", "one-shot divergence probe, writes probe.csv");
  add_common(probe, probe_args, false);

  auto* demo = app.add_subcommand("demo", "ensembling rules on three clients that each see two classes, writes demo.txt");
  add_common(demo, demo_args, false);
  diag::EnsembleDemoOptions demo_options;
  demo->add_option("--pretrain-steps", demo_options.global_pretrain_steps,
                   "central steps for the global model before the round");
  demo->add_option("--fractions", demo_options.sample_fractions, "share of samples kept by each of the three clients");
  demo->add_option("--train-per-class", demo_options.train_per_class, "training samples per class")
      ->check(CLI::PositiveNumber);
  demo->add_option("--pool-per-class", demo_options.pool_per_class, "pool samples per class")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_args);
    if (*cross) return cmd_crossdomain(cross_args, identity_shift);
    if (*probe) return cmd_probe(probe_args);
    if (*demo) return cmd_demo(demo_args, demo_options);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
