#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <string>

#include "hetpatrol/engine.hpp"
#include "hetpatrol/experiments.hpp"

using namespace hetpatrol;
using namespace hetpatrol::engine;

namespace {

const experiments::MapAssets& desk() {
  static const auto assets =
      experiments::load_assets(std::filesystem::path(HETPATROL_DATA_DIR) / "maps", "desk", signal::SignalParams{});
  return assets;
}

// Three nodes on a line 2 m apart, so with a 2.5 m range only neighbours hear each other.
struct Chain {
  world::GridMap map = world::load_map("mpc 0.5\n12 2\n............\n............\n");
  world::PatrolGraph graph =
      world::load_graph("node 0 0.75 0.25\nnode 1 2.75 0.25\nnode 2 4.75 0.25\nedge 0 1\nedge 1 2\n", map);
};

TrialConfig chain_config(std::uint64_t seed) {
  TrialConfig c;
  c.agents = 3;
  c.searchers = 1;
  c.patrollers_measure = false;
  c.comm_range = CommRange::of(2.5);
  c.seed = seed;
  c.anomaly_earliest = 1;
  c.anomaly_latest = 1;
  c.duration = 10;
  c.idleness_start = 0;
  c.max_speed = 1e-4;
  return c;
}

}  // namespace

TEST_CASE("communicate examples") {
  const Position p[] = {{0, 0}, {2.5, 0}, {5, 0}, {5, 0.1}};
  const auto h = communicate(p, CommRange::of(2.5));
  CHECK(h[0] == std::vector<std::size_t>{1});
  CHECK(h[1] == std::vector<std::size_t>{0, 2});
  CHECK(h[2] == std::vector<std::size_t>{1, 3});
  CHECK(h[3] == std::vector<std::size_t>{2});
  const auto g = communicate(p, CommRange::global());
  CHECK(g[0] == std::vector<std::size_t>{1, 2, 3});
  CHECK(g[3] == std::vector<std::size_t>{0, 1, 2});
  CHECK(communicate({}, CommRange::of(1)).empty());
}

TEST_CASE("communication is symmetric") {
  CounterRng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Position> p;
    for (int i = 0; i < 12; ++i) p.push_back({rng.uniform01() * 10, rng.uniform01() * 10});
    const auto h = communicate(p, CommRange::of(3.0));
    for (std::size_t r = 0; r < p.size(); ++r) {
      for (std::size_t s = 0; s < p.size(); ++s) {
        const bool rs = std::find(h[r].begin(), h[r].end(), s) != h[r].end();
        const bool sr = std::find(h[s].begin(), h[s].end(), r) != h[s].end();
        CHECK(rs == sr);
        if (r != s) CHECK(rs == (distance(p[r], p[s]) <= 3.0));
      }
    }
  }
}

TEST_CASE("comm range text") {
  CHECK(CommRange::of(2.5).to_string() == "2.5000");
  CHECK(CommRange::global().to_string() == "global");
  CHECK(CommRange::parse("global").is_global());
  CHECK(CommRange::parse("4").meters == 4.0);
  CHECK_THROWS_AS(CommRange::parse("0"), ConfigError);
  CHECK_THROWS_AS(CommRange::parse("2m"), ConfigError);
  CHECK(parse_algorithm("hcpso") == Algorithm::HcPso);
  CHECK_THROWS_AS(parse_algorithm("PSO2"), ConfigError);
}

TEST_CASE("idleness accumulator") {
  SUBCASE("never visited node averages the midpoint") {
    IdlenessAccumulator acc(250, 2000);
    patrol::IdlenessLedger l(1);
    for (int t = 0; t <= 2000; ++t) acc.sample(l, t);
    CHECK(acc.average() == doctest::Approx(1125.0));
  }
  SUBCASE("node visited every step contributes zero") {
    IdlenessAccumulator acc(250, 2000);
    patrol::IdlenessLedger l(2);
    for (int t = 0; t <= 2000; ++t) {
      l.record_visit(0, t);
      acc.sample(l, t);
    }
    CHECK(acc.average() == doctest::Approx(1125.0 / 2));
  }
  SUBCASE("single node always visited") {
    IdlenessAccumulator acc(250, 2000);
    patrol::IdlenessLedger l(1);
    for (int t = 0; t <= 2000; ++t) {
      l.record_visit(0, t);
      acc.sample(l, t);
    }
    CHECK(acc.average() == 0.0);
  }
}

TEST_CASE("start nodes are evenly spaced and valid") {
  CHECK(start_nodes(10, 6) == std::vector<std::size_t>{0, 1, 3, 5, 6, 8});
  CHECK(start_nodes(4, 4) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(start_nodes(3, 6) == std::vector<std::size_t>{0, 0, 1, 1, 2, 2});
  for (std::size_t m = 1; m < 30; ++m) {
    for (std::size_t n = 1; n < 30; ++n) {
      for (auto s : start_nodes(m, n)) CHECK(s < m);
    }
  }
}

TEST_CASE("config validation") {
  TrialConfig c;
  c.searchers = 7;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.duration = 500;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.max_speed = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("randomized trials keep the engine invariants") {
  const auto& d = desk();
  CounterRng gen(20240611);
  const CommRange ranges[] = {CommRange::of(1.5), CommRange::of(2.5), CommRange::of(6), CommRange::global()};
  const Algorithm algs[] = {Algorithm::Pso, Algorithm::HcPso, Algorithm::Ecoli};
  int trials = 0, successes = 0;
  for (int i = 0; i < 1000; ++i) {
    TrialConfig c;
    c.agents = 1 + static_cast<int>(gen.uniform_below(8));
    c.searchers = static_cast<int>(gen.uniform_below(static_cast<std::uint64_t>(c.agents) + 1));
    c.algorithm = algs[gen.uniform_below(3)];
    c.comm_range = ranges[gen.uniform_below(4)];
    c.patrollers_measure = gen.uniform_below(2) == 1;
    c.seed = gen.next_u64();
    c.duration = 620 + static_cast<int>(gen.uniform_below(200));
    const auto& sm = d.signal_maps[gen.uniform_below(d.signal_maps.size())];

    Trial t(c, d.map, d.graph, sm);
    CHECK(t.t_appear() >= 400);
    CHECK(t.t_appear() <= 600);
    std::vector<Position> prev;
    for (const auto& a : t.agents()) prev.push_back(a.pos);
    std::vector<char> found(t.agents().size(), 0);
    int searchers = 0;
    for (const auto& a : t.agents()) searchers += a.role == Role::Searcher;
    CHECK(searchers == c.searchers);
    while (!t.finished()) {
      t.step();
      for (std::size_t j = 0; j < t.agents().size(); ++j) {
        const Agent& a = t.agents()[j];
        if (distance(prev[j], a.pos) > c.max_speed + 1e-9) FAIL("agent moved too far");
        if (!d.map.free(a.pos)) FAIL("agent left free space");
        if (a.role == Role::Patroller && (a.mode != Mode::Patrolling || a.search_proposals != 0)) {
          FAIL("patroller searched");
        }
        if (found[j] && !a.knowledge.found) FAIL("found flag reset");
        if (!a.can_measure && a.knowledge.pbest) FAIL("non-measuring agent has a reading");
        found[j] = a.knowledge.found;
        prev[j] = a.pos;
      }
      if (t.now() < t.t_appear()) CHECK_FALSE(t.emitter_active());
    }
    const auto r = t.result();
    if (c.searchers == 0) CHECK_FALSE(r.success);
    CHECK(r.success == r.ttf.has_value());
    if (r.ttf) CHECK(*r.ttf >= 0);
    CHECK(std::isfinite(r.avg_idleness));
    CHECK(r.avg_idleness >= 0.0);
    ++trials;
    successes += r.success;
  }
  CHECK(trials == 1000);
  CHECK(successes > 0);
}

TEST_CASE("trials are deterministic including the trace") {
  const auto& d = desk();
  for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
    TrialConfig c;
    c.agents = 6;
    c.searchers = 3;
    c.algorithm = Algorithm::HcPso;
    c.comm_range = CommRange::of(2.5);
    c.seed = seed;
    std::ostringstream t1, t2;
    const auto a = run_trial(c, d.map, d.graph, d.signal_maps[0], &t1);
    const auto b = run_trial(c, d.map, d.graph, d.signal_maps[0], &t2);
    CHECK(a == b);
    CHECK(t1.str() == t2.str());
    CHECK(!t1.str().empty());
    // The trace does not influence the run.
    CHECK(run_trial(c, d.map, d.graph, d.signal_maps[0]) == a);
  }
}

TEST_CASE("average idleness matches arrivals recorded in the trace") {
  const auto& d = desk();
  for (std::uint64_t seed : {5ull, 6ull}) {
    TrialConfig c;
    c.agents = 4;
    c.searchers = 1;
    c.comm_range = CommRange::of(4);
    c.seed = seed;
    std::ostringstream trace;
    const auto r = run_trial(c, d.map, d.graph, d.signal_maps[1], &trace);

    std::map<int, std::vector<int>> arrivals;  // time -> node ids
    std::istringstream in(trace.str());
    std::string line;
    while (std::getline(in, line)) {
      const auto pos = line.find(" arrive node=");
      if (pos == std::string::npos) continue;
      const int t = std::stoi(line.substr(2));
      arrivals[t].push_back(std::stoi(line.substr(pos + 13)));
    }
    std::map<int, double> last;
    for (const auto& n : d.graph.nodes()) last[n.id] = 0.0;
    double sum = 0.0;
    for (int t = 0; t <= c.duration; ++t) {
      if (auto it = arrivals.find(t); it != arrivals.end()) {
        for (int id : it->second) last[id] = t;
      }
      if (t < c.idleness_start) continue;
      double total = 0.0;
      for (auto [id, lv] : last) total += t - lv;
      sum += total / static_cast<double>(last.size());
    }
    CHECK(r.avg_idleness == doctest::Approx(sum / (c.duration - c.idleness_start + 1)).epsilon(1e-12));
  }
}

TEST_CASE("ground truth ignores communication range") {
  // A single agent never hears anybody, so its walk is the same under any range.
  const auto& d = desk();
  TrialConfig c;
  c.agents = 1;
  c.seed = 12;
  c.comm_range = CommRange::of(1.5);
  const auto a = run_trial(c, d.map, d.graph, d.signal_maps[0]);
  c.comm_range = CommRange::global();
  const auto b = run_trial(c, d.map, d.graph, d.signal_maps[0]);
  CHECK(a.avg_idleness == b.avg_idleness);
}

TEST_CASE("readings relay along a chain") {
  Chain ch;
  signal::SignalParams p;
  p.found_threshold_dbm = -85;  // every cell of the small map is already above it
  p.detection_floor_dbm = -120;
  const auto sm = signal::build_signal_map(ch.map, {5.75, 0.75}, p);
  REQUIRE(sm.min_rssi() >= p.found_threshold_dbm);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Trial t(chain_config(seed), ch.map, ch.graph, sm);
    REQUIRE(t.t_appear() == 1);
    t.step();
    CHECK(t.t_found() == 1);
    // Two hops reach everybody by the next exchange.
    t.step();
    for (const auto& a : t.agents()) {
      CHECK(a.knowledge.found);
      CHECK(a.knowledge.gbest.has_value());
      if (a.role == Role::Patroller) CHECK_FALSE(a.knowledge.pbest.has_value());
    }
    CHECK(t.result().ttf == 0);
  }
}

TEST_CASE("global best spreads one hop per step") {
  Chain ch;
  signal::SignalParams p;
  const auto sm = signal::build_signal_map(ch.map, {5.75, 0.75}, p);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto c = chain_config(seed);
    Trial t(c, ch.map, ch.graph, sm);
    t.step();
    int searcher = -1;
    for (const auto& a : t.agents()) {
      if (a.role == Role::Searcher) searcher = a.id;
    }
    REQUIRE(searcher >= 0);
    for (const auto& a : t.agents()) {
      const bool within_one_hop = std::abs(a.id - searcher) <= 1;
      CHECK(a.knowledge.gbest.has_value() == within_one_hop);
    }
    t.step();
    for (const auto& a : t.agents()) CHECK(a.knowledge.gbest.has_value());
  }
}

TEST_CASE("without measuring patrollers and no searchers nobody senses") {
  Chain ch;
  const auto sm = signal::build_signal_map(ch.map, {5.75, 0.75}, signal::SignalParams{});
  auto c = chain_config(3);
  c.searchers = 0;
  Trial t(c, ch.map, ch.graph, sm);
  while (!t.finished()) t.step();
  for (const auto& a : t.agents()) CHECK_FALSE(a.knowledge.gbest.has_value());
  CHECK_FALSE(t.result().success);
}
