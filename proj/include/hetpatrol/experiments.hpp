#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hetpatrol/engine.hpp"
#include "hetpatrol/signalmodel.hpp"
#include "hetpatrol/worldmap.hpp"

namespace hetpatrol::experiments {

struct MapSpec {
  std::string name;
  std::vector<int> agent_counts;
};

struct SweepConfig {
  std::vector<MapSpec> maps;
  std::optional<std::vector<int>> searcher_counts;  // nullopt: every k in 0..N
  std::vector<engine::Algorithm> algorithms;
  std::vector<engine::CommRange> comm_ranges;
  std::vector<bool> patrollers_measure;
  std::vector<int> sources;  // indices into each map's source list
  int repetitions = 15;
  std::uint64_t base_seed = 0;
  int duration = 2000;
  std::filesystem::path map_dir;
  signal::SignalParams signal;
};

/// Parses `key = value` lines (comma-separated lists, `#` comments).
/// Relative map_dir is resolved against `base_dir`. When base_seed is absent
/// the HETPATROL_SEED environment variable is used, else 0.
SweepConfig parse_sweep_config(std::string_view text, const std::filesystem::path& base_dir = {});

struct TrialKey {
  std::string map;
  int agents = 0;
  int searchers = 0;
  engine::Algorithm algorithm = engine::Algorithm::Pso;
  engine::CommRange comm_range;
  bool patrollers_measure = true;
  int source = 0;
  int rep = 0;

  /// The first eight CSV columns, comma-joined.
  std::string to_string() const;
};

struct PlannedTrial {
  TrialKey key;
  engine::TrialConfig config;
};

/// Stable seed for one trial tuple.
std::uint64_t trial_seed(std::uint64_t base_seed, const TrialKey& key);

/// Full Cartesian product in canonical order
/// (map, N, k, algorithm, range, pm, source, rep).
std::vector<PlannedTrial> enumerate(const SweepConfig& cfg);

enum class Outcome { Ok, Error };

struct TrialRecord {
  TrialKey key;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::Ok;
  int t_appear = 0;
  double avg_idleness = 0.0;
  std::optional<int> ttf;
  bool success = false;
};

inline constexpr std::string_view kCsvHeader =
    "map,N,k,algorithm,comm_range,pm,source,rep,seed,t_appear,avg_idleness,ttf,success";

std::string to_csv_row(const TrialRecord& r);
TrialRecord parse_csv_row(std::string_view line);

/// Reads a records CSV (header checked). Throws on header mismatch.
std::vector<TrialRecord> read_records(std::string_view text);

TrialRecord make_record(const PlannedTrial& t, const engine::TrialResult& result);

/// Map, patrol graph, source list and one signal map per source.
struct MapAssets {
  std::string name;
  world::GridMap map;
  world::PatrolGraph graph;
  std::vector<Position> sources;
  std::vector<signal::SignalMap> signal_maps;
};

std::vector<Position> parse_sources(std::string_view text);

/// Loads `<dir>/<name>.map`, `.graph` and `.sources`, and builds the signal maps.
MapAssets load_assets(const std::filesystem::path& dir, const std::string& name, const signal::SignalParams& params);

std::string read_file(const std::filesystem::path& path);

struct SweepOptions {
  int parallelism = 1;
  bool resume = false;
};

struct SweepSummary {
  std::size_t planned = 0;
  std::size_t executed = 0;
  std::size_t skipped = 0;
  std::size_t errors = 0;
};

/// Runs every planned trial not already present in `out` (when resuming) and
/// appends rows in canonical order. Completed output is always sorted
/// canonically and independent of parallelism. Per-trial exceptions become
/// error rows.
SweepSummary run_sweep(const SweepConfig& cfg, const std::map<std::string, MapAssets>& assets,
                       const std::filesystem::path& out, const SweepOptions& opts);

/// Runs the sweep, loading assets from cfg.map_dir.
SweepSummary run_sweep(const SweepConfig& cfg, const std::filesystem::path& out, const SweepOptions& opts);

}  // namespace hetpatrol::experiments
