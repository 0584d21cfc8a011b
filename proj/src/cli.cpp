#include "hetpatrol/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "hetpatrol/analysis.hpp"
#include "hetpatrol/engine.hpp"
#include "hetpatrol/experiments.hpp"
#include "hetpatrol/signalmodel.hpp"
#include "hetpatrol/worldmap.hpp"

namespace hetpatrol::cli {

namespace {

namespace fs = std::filesystem;

std::uint64_t seed_fallback() {
  if (const char* env = std::getenv("HETPATROL_SEED"); env != nullptr && *env != '\0') {
    return std::stoull(env);
  }
  return 0;
}

Position parse_xy(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw std::invalid_argument(fmt::format("expected X,Y but got `{}`", s));
  std::size_t used_x = 0;
  std::size_t used_y = 0;
  const std::string xs = s.substr(0, comma);
  const std::string ys = s.substr(comma + 1);
  const double x = std::stod(xs, &used_x);
  const double y = std::stod(ys, &used_y);
  if (used_x != xs.size() || used_y != ys.size()) throw std::invalid_argument(fmt::format("bad coordinate `{}`", s));
  return {x, y};
}

bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::invalid_argument(fmt::format("expected true|false but got `{}`", s));
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  f << text;
}

struct SignalOpts {
  std::string map;
  std::string source;
  std::string out;
  signal::SignalParams params;
};

struct TrialOpts {
  std::string map, graph, signal;
  int n = 6;
  int k = 0;
  std::string alg = "pso";
  std::string range = "global";
  std::string pm = "true";
  std::optional<std::uint64_t> seed;
  int source = 0;
  bool trace = false;
};

struct SweepOpts {
  std::string config;
  std::string out;
  int parallel = 1;
  bool resume = false;
};

struct AnalyzeOpts {
  std::string records;
  std::string out_dir;
  int boot = 10000;
  std::uint64_t boot_seed = 0;
};

int cmd_signalmap(const SignalOpts& o, std::ostream& out) {
  o.params.validate();
  const auto map = world::load_map(experiments::read_file(o.map));
  const Position src = parse_xy(o.source);
  const auto sm = signal::build_signal_map(map, src, o.params);
  write_file(o.out, signal::format_signal_map(sm));
  out << fmt::format("max_rssi={:.4f} min_rssi={:.4f} cells_at_or_above_threshold={}\n", sm.max_rssi(), sm.min_rssi(),
                     sm.cells_at_or_above(o.params.found_threshold_dbm));
  return 0;
}

int cmd_trial(const TrialOpts& o, std::ostream& out, std::ostream& err) {
  const auto map = world::load_map(experiments::read_file(o.map));
  const auto graph = world::load_graph(experiments::read_file(o.graph), map);
  const auto sm = signal::parse_signal_map(experiments::read_file(o.signal), map);

  experiments::PlannedTrial t;
  t.key.map = fs::path(o.map).stem().string();
  t.key.agents = o.n;
  t.key.searchers = o.k;
  t.key.algorithm = engine::parse_algorithm(o.alg);
  t.key.comm_range = engine::CommRange::parse(o.range);
  t.key.patrollers_measure = parse_bool(o.pm);
  t.key.source = o.source;
  t.key.rep = 0;
  auto& c = t.config;
  c.map_id = t.key.map;
  c.source_id = std::to_string(o.source);
  c.agents = o.n;
  c.searchers = o.k;
  c.algorithm = t.key.algorithm;
  c.comm_range = t.key.comm_range;
  c.patrollers_measure = t.key.patrollers_measure;
  c.seed = o.seed ? *o.seed : seed_fallback();
  c.validate();

  const auto result = engine::run_trial(c, map, graph, sm, o.trace ? &err : nullptr);
  out << experiments::to_csv_row(experiments::make_record(t, result)) << '\n';
  return 0;
}

int cmd_sweep(const SweepOpts& o, std::ostream& out) {
  const fs::path cfg_path(o.config);
  const auto cfg = experiments::parse_sweep_config(experiments::read_file(cfg_path), cfg_path.parent_path());
  const auto s = experiments::run_sweep(cfg, o.out, {o.parallel, o.resume});
  out << fmt::format("planned={} executed={} skipped={} errors={}\n", s.planned, s.executed, s.skipped, s.errors);
  return 0;
}

int cmd_analyze(const AnalyzeOpts& o, std::ostream& out, std::ostream& err) {
  const auto records = experiments::read_records(experiments::read_file(o.records));
  if (records.empty()) throw std::invalid_argument("records file has no rows");
  analysis::AnalysisOptions opts;
  opts.resamples = o.boot;
  opts.seed = o.boot_seed;
  opts.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto rep = analysis::analyze(records, o.out_dir, opts);
  for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
  out << "knee=" << rep.medians[rep.pareto.knee].label.to_string() << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heterogeneous patrol and source-seeking simulator"};
  app.require_subcommand(1, 1);

  SignalOpts so;
  auto* sig = app.add_subcommand("signalmap", "Build a signal map cache for one source");
  sig->add_option("--map", so.map, "Map file")->required();
  sig->add_option("--source", so.source, "Source position X,Y in meters")->required();
  sig->add_option("--tx", so.params.tx_power_dbm, "Transmit power (dBm)");
  sig->add_option("--freq", so.params.frequency_hz, "Frequency (Hz)");
  sig->add_option("--wall", so.params.wall_attenuation_db, "Attenuation per wall (dB)");
  sig->add_option("--threshold", so.params.found_threshold_dbm, "Found threshold (dBm)");
  sig->add_option("--floor", so.params.detection_floor_dbm, "Detection floor (dBm)");
  sig->add_option("--out", so.out, "Output cache file")->required();

  TrialOpts to;
  std::uint64_t seed_value = 0;
  auto* trial = app.add_subcommand("trial", "Run one trial and print its record");
  trial->add_option("--map", to.map)->required();
  trial->add_option("--graph", to.graph)->required();
  trial->add_option("--signal", to.signal)->required();
  trial->add_option("--n", to.n)->required();
  trial->add_option("--k", to.k)->required();
  trial->add_option("--alg", to.alg)->required();
  trial->add_option("--range", to.range)->required();
  trial->add_option("--pm", to.pm)->required();
  auto* seed_opt = trial->add_option("--seed", seed_value);
  trial->add_option("--source", to.source, "Source index written to the record");
  trial->add_flag("--trace", to.trace, "Write event trace to stderr");

  SweepOpts wo;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep->add_option("--config", wo.config)->required();
  sweep->add_option("--out", wo.out)->required();
  sweep->add_option("--parallel", wo.parallel)->check(CLI::PositiveNumber);
  sweep->add_flag("--resume", wo.resume);

  AnalyzeOpts ao;
  auto* an = app.add_subcommand("analyze", "Pareto, bootstrap and statistical tests");
  an->add_option("--records", ao.records)->required();
  an->add_option("--out-dir", ao.out_dir)->required();
  an->add_option("--boot", ao.boot)->check(CLI::PositiveNumber);
  an->add_option("--boot-seed", ao.boot_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*sig) return cmd_signalmap(so, out);
    if (*trial) {
      if (seed_opt->count() > 0) to.seed = seed_value;
      return cmd_trial(to, out, err);
    }
    if (*sweep) return cmd_sweep(wo, out);
    if (*an) return cmd_analyze(ao, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace hetpatrol::cli
