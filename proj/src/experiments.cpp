#include "hetpatrol/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/core.h>

#include "hetpatrol/rng.hpp"

namespace hetpatrol::experiments {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int to_int(const std::string& s, std::string_view what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument("");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw engine::ConfigError(fmt::format("{}: `{}` is not an integer", what, s));
  }
}

std::uint64_t to_u64(const std::string& s, std::string_view what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size() || s.starts_with('-')) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw engine::ConfigError(fmt::format("{}: `{}` is not an unsigned integer", what, s));
  }
}

double to_double(const std::string& s, std::string_view what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw engine::ConfigError(fmt::format("{}: `{}` is not a number", what, s));
  }
}

bool to_bool(const std::string& s, std::string_view what) {
  if (s == "true" || s == "True" || s == "1") return true;
  if (s == "false" || s == "False" || s == "0") return false;
  throw engine::ConfigError(fmt::format("{}: `{}` is not a boolean", what, s));
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepConfig parse_sweep_config(std::string_view text, const std::filesystem::path& base_dir) {
  SweepConfig cfg;
  cfg.algorithms = {engine::Algorithm::Pso, engine::Algorithm::HcPso, engine::Algorithm::Ecoli};
  cfg.comm_ranges = {engine::CommRange::of(1.5), engine::CommRange::of(2.5), engine::CommRange::of(4),
                     engine::CommRange::of(6),   engine::CommRange::of(8),   engine::CommRange::global()};
  cfg.patrollers_measure = {true, false};
  cfg.sources = {0, 1, 2};
  cfg.map_dir = base_dir;

  std::vector<std::string> map_names;
  std::map<std::string, std::vector<int>> agent_counts;
  bool have_seed = false;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw engine::ConfigError(fmt::format("line {}: expected `key = value`", line_no));
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto items = split(value, ',');

    if (key == "maps") {
      map_names = items;
    } else if (key.starts_with("agents.")) {
      auto& counts = agent_counts[key.substr(7)];
      counts.clear();
      for (const auto& it : items) counts.push_back(to_int(it, key));
    } else if (key == "searchers") {
      if (value == "all") {
        cfg.searcher_counts.reset();
      } else {
        cfg.searcher_counts.emplace();
        for (const auto& it : items) cfg.searcher_counts->push_back(to_int(it, key));
      }
    } else if (key == "algorithms") {
      cfg.algorithms.clear();
      for (const auto& it : items) cfg.algorithms.push_back(engine::parse_algorithm(it));
    } else if (key == "comm_ranges") {
      cfg.comm_ranges.clear();
      for (const auto& it : items) cfg.comm_ranges.push_back(engine::CommRange::parse(it));
    } else if (key == "pm") {
      cfg.patrollers_measure.clear();
      for (const auto& it : items) cfg.patrollers_measure.push_back(to_bool(it, key));
    } else if (key == "sources") {
      cfg.sources.clear();
      for (const auto& it : items) cfg.sources.push_back(to_int(it, key));
    } else if (key == "repetitions") {
      cfg.repetitions = to_int(value, key);
    } else if (key == "base_seed") {
      cfg.base_seed = to_u64(value, key);
      have_seed = true;
    } else if (key == "duration") {
      cfg.duration = to_int(value, key);
    } else if (key == "map_dir") {
      const std::filesystem::path p(value);
      cfg.map_dir = p.is_absolute() ? p : base_dir / p;
    } else if (key == "tx_dbm") {
      cfg.signal.tx_power_dbm = to_double(value, key);
    } else if (key == "freq_hz") {
      cfg.signal.frequency_hz = to_double(value, key);
    } else if (key == "wall_db") {
      cfg.signal.wall_attenuation_db = to_double(value, key);
    } else if (key == "threshold_dbm") {
      cfg.signal.found_threshold_dbm = to_double(value, key);
    } else if (key == "floor_dbm") {
      cfg.signal.detection_floor_dbm = to_double(value, key);
    } else {
      throw engine::ConfigError(fmt::format("line {}: unknown key `{}`", line_no, key));
    }
  }

  for (const auto& name : map_names) {
    if (name.empty()) continue;
    auto it = agent_counts.find(name);
    if (it == agent_counts.end() || it->second.empty()) {
      throw engine::ConfigError(fmt::format("map `{}` has no `agents.{}` list", name, name));
    }
    cfg.maps.push_back({name, it->second});
  }
  for (const auto& [name, counts] : agent_counts) {
    if (std::find(map_names.begin(), map_names.end(), name) == map_names.end()) {
      throw engine::ConfigError(fmt::format("`agents.{}` given for a map not listed in `maps`", name));
    }
  }
  if (cfg.repetitions < 1) throw engine::ConfigError("repetitions must be >= 1");
  if (!have_seed) {
    if (const char* env = std::getenv("HETPATROL_SEED"); env != nullptr && *env != '\0') {
      cfg.base_seed = to_u64(env, "HETPATROL_SEED");
    }
  }
  cfg.signal.validate();
  return cfg;
}

std::string TrialKey::to_string() const {
  return fmt::format("{},{},{},{},{},{},{},{}", map, agents, searchers, engine::to_string(algorithm),
                     comm_range.to_string(), patrollers_measure ? "true" : "false", source, rep);
}

std::uint64_t trial_seed(std::uint64_t base_seed, const TrialKey& key) {
  return hash_string(mix64(base_seed), key.to_string());
}

std::vector<PlannedTrial> enumerate(const SweepConfig& cfg) {
  std::vector<PlannedTrial> out;
  for (const auto& m : cfg.maps) {
    for (int n : m.agent_counts) {
      std::vector<int> ks;
      if (cfg.searcher_counts) {
        for (int k : *cfg.searcher_counts) {
          if (k >= 0 && k <= n) ks.push_back(k);
        }
      } else {
        for (int k = 0; k <= n; ++k) ks.push_back(k);
      }
      for (int k : ks) {
        for (auto alg : cfg.algorithms) {
          for (auto range : cfg.comm_ranges) {
            for (bool pm : cfg.patrollers_measure) {
              for (int src : cfg.sources) {
                for (int rep = 0; rep < cfg.repetitions; ++rep) {
                  PlannedTrial t;
                  t.key = {m.name, n, k, alg, range, pm, src, rep};
                  auto& c = t.config;
                  c.map_id = m.name;
                  c.source_id = std::to_string(src);
                  c.agents = n;
                  c.searchers = k;
                  c.algorithm = alg;
                  c.comm_range = range;
                  c.patrollers_measure = pm;
                  c.duration = cfg.duration;
                  c.seed = trial_seed(cfg.base_seed, t.key);
                  out.push_back(std::move(t));
                }
              }
            }
          }
        }
      }
    }
  }
  return out;
}

std::string to_csv_row(const TrialRecord& r) {
  if (r.outcome == Outcome::Error) {
    return fmt::format("{},{},,,,error", r.key.to_string(), r.seed);
  }
  return fmt::format("{},{},{},{:.4f},{},{}", r.key.to_string(), r.seed, r.t_appear, r.avg_idleness,
                     r.ttf ? std::to_string(*r.ttf) : std::string(), r.success ? "true" : "false");
}

TrialRecord parse_csv_row(std::string_view line) {
  const auto f = split(line, ',');
  if (f.size() != 13) throw std::runtime_error(fmt::format("records row has {} fields (expected 13)", f.size()));
  TrialRecord r;
  r.key.map = f[0];
  r.key.agents = to_int(f[1], "N");
  r.key.searchers = to_int(f[2], "k");
  r.key.algorithm = engine::parse_algorithm(f[3]);
  r.key.comm_range = engine::CommRange::parse(f[4]);
  r.key.patrollers_measure = to_bool(f[5], "pm");
  r.key.source = to_int(f[6], "source");
  r.key.rep = to_int(f[7], "rep");
  r.seed = to_u64(f[8], "seed");
  if (f[12] == "error") {
    r.outcome = Outcome::Error;
    return r;
  }
  r.t_appear = to_int(f[9], "t_appear");
  r.avg_idleness = to_double(f[10], "avg_idleness");
  if (!f[11].empty()) r.ttf = to_int(f[11], "ttf");
  r.success = to_bool(f[12], "success");
  if (r.success != r.ttf.has_value()) throw std::runtime_error("records row: ttf must be present iff success");
  return r;
}

std::vector<TrialRecord> read_records(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("records file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw std::runtime_error("records header mismatch");
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(parse_csv_row(line));
  }
  return out;
}

TrialRecord make_record(const PlannedTrial& t, const engine::TrialResult& result) {
  TrialRecord r;
  r.key = t.key;
  r.seed = t.config.seed;
  r.t_appear = result.t_appear;
  r.avg_idleness = result.avg_idleness;
  r.ttf = result.ttf;
  r.success = result.success;
  return r;
}

std::vector<Position> parse_sources(std::string_view text) {
  std::vector<Position> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key.starts_with("//")) continue;
    Position p;
    std::string extra;
    if (key != "source" || !(ls >> p.x >> p.y) || (ls >> extra)) {
      throw world::MapError(fmt::format("sources: malformed line `{}`", line));
    }
    out.push_back(p);
  }
  return out;
}

MapAssets load_assets(const std::filesystem::path& dir, const std::string& name, const signal::SignalParams& params) {
  world::GridMap map = world::load_map(read_file(dir / (name + ".map")));
  world::PatrolGraph graph = world::load_graph(read_file(dir / (name + ".graph")), map);
  std::vector<Position> sources = parse_sources(read_file(dir / (name + ".sources")));
  std::vector<signal::SignalMap> sms;
  for (const auto& s : sources) sms.push_back(signal::build_signal_map(map, s, params));
  return MapAssets{name, std::move(map), std::move(graph), std::move(sources), std::move(sms)};
}

namespace {

engine::TrialResult execute(const PlannedTrial& t, const std::map<std::string, MapAssets>& assets) {
  const auto it = assets.find(t.key.map);
  if (it == assets.end()) throw std::runtime_error(fmt::format("no assets for map `{}`", t.key.map));
  const MapAssets& a = it->second;
  if (t.key.source < 0 || static_cast<std::size_t>(t.key.source) >= a.signal_maps.size()) {
    throw std::runtime_error(fmt::format("map `{}` has no source {}", a.name, t.key.source));
  }
  return engine::run_trial(t.config, a.map, a.graph, a.signal_maps[static_cast<std::size_t>(t.key.source)]);
}

}  // namespace

SweepSummary run_sweep(const SweepConfig& cfg, const std::map<std::string, MapAssets>& assets,
                       const std::filesystem::path& out, const SweepOptions& opts) {
  const auto planned = enumerate(cfg);
  SweepSummary summary;
  summary.planned = planned.size();

  std::map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < planned.size(); ++i) order.emplace(planned[i].key.to_string(), i);

  // Existing rows (resume): keep complete lines only.
  std::vector<std::pair<std::size_t, std::string>> existing;
  std::set<std::size_t> done;
  bool canonical = true;
  if (opts.resume && std::filesystem::exists(out)) {
    std::string text = read_file(out);
    if (const auto last_nl = text.rfind('\n'); last_nl == std::string::npos) {
      text.clear();
    } else {
      text.resize(last_nl + 1);
    }
    std::istringstream in(text);
    std::string line;
    if (std::getline(in, line) && line != kCsvHeader) throw std::runtime_error("resume: records header mismatch");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const TrialRecord r = parse_csv_row(line);
      const auto it = order.find(r.key.to_string());
      if (it == order.end()) throw std::runtime_error("resume: records file contains trials outside this sweep");
      if (!done.insert(it->second).second) continue;
      if (!existing.empty() && existing.back().first > it->second) canonical = false;
      existing.emplace_back(it->second, line);
    }
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < planned.size(); ++i) {
    if (!done.count(i)) todo.push_back(i);
  }
  summary.skipped = done.size();
  if (!existing.empty() && !todo.empty() && existing.back().first > todo.front()) canonical = false;

  if (!canonical) {
    // Rewrite existing rows canonically before appending.
    std::sort(existing.begin(), existing.end());
  }
  {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(fmt::format("cannot write {}", out.string()));
    f << kCsvHeader << '\n';
    for (const auto& [idx, line] : existing) f << line << '\n';
  }

  std::vector<std::optional<TrialRecord>> results(todo.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    while (true) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= todo.size()) return;
      const PlannedTrial& t = planned[todo[slot]];
      TrialRecord rec;
      try {
        rec = make_record(t, execute(t, assets));
      } catch (const std::exception&) {
        rec.key = t.key;
        rec.seed = t.config.seed;
        rec.outcome = Outcome::Error;
      }
      {
        std::lock_guard lk(mu);
        results[slot] = std::move(rec);
      }
      cv.notify_all();
    }
  };

  const int threads = std::max(1, opts.parallelism);
  std::vector<std::thread> pool;
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);

  {
    std::ofstream f(out, std::ios::binary | std::ios::app);
    for (std::size_t slot = 0; slot < todo.size(); ++slot) {
      TrialRecord rec;
      {
        std::unique_lock lk(mu);
        cv.wait(lk, [&] { return results[slot].has_value(); });
        rec = std::move(*results[slot]);
        results[slot].reset();
      }
      if (rec.outcome == Outcome::Error) ++summary.errors;
      f << to_csv_row(rec) << '\n';
      f.flush();
      ++summary.executed;
    }
  }
  for (auto& th : pool) th.join();

  if (!existing.empty() && !todo.empty() && existing.back().first > todo.front()) {
    // Interleaved keys: merge into canonical order.
    const auto records = read_records(read_file(out));
    std::vector<std::pair<std::size_t, std::string>> rows;
    for (const auto& r : records) rows.emplace_back(order.at(r.key.to_string()), to_csv_row(r));
    std::sort(rows.begin(), rows.end());
    const auto tmp = std::filesystem::path(out.string() + ".tmp");
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      f << kCsvHeader << '\n';
      for (const auto& [idx, line] : rows) f << line << '\n';
    }
    std::filesystem::rename(tmp, out);
  }
  return summary;
}

SweepSummary run_sweep(const SweepConfig& cfg, const std::filesystem::path& out, const SweepOptions& opts) {
  std::map<std::string, MapAssets> assets;
  for (const auto& m : cfg.maps) {
    if (!assets.count(m.name)) assets.emplace(m.name, load_assets(cfg.map_dir, m.name, cfg.signal));
  }
  return run_sweep(cfg, assets, out, opts);
}

}  // namespace hetpatrol::experiments
