#include "hetpatrol/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/core.h>

#include "hetpatrol/simd/kernels.hpp"

namespace hetpatrol::engine {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Pso: return "pso";
    case Algorithm::HcPso: return "hcpso";
    case Algorithm::Ecoli: return "ecoli";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "pso") return Algorithm::Pso;
  if (s == "hcpso") return Algorithm::HcPso;
  if (s == "ecoli") return Algorithm::Ecoli;
  throw ConfigError(fmt::format("unknown algorithm `{}` (expected pso|hcpso|ecoli)", s));
}

std::string CommRange::to_string() const {
  return is_global() ? std::string("global") : fmt::format("{:.4f}", meters);
}

CommRange CommRange::parse(std::string_view s) {
  if (s == "global" || s == "Global") return global();
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double m = std::stod(str, &used);
    if (used != str.size() || !(m > 0.0) || !std::isfinite(m)) throw ConfigError("");
    return of(m);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("bad communication range `{}` (expected meters > 0 or global)", s));
  }
}

void TrialConfig::validate() const {
  if (agents < 1) throw ConfigError("agent count must be >= 1");
  if (searchers < 0 || searchers > agents) throw ConfigError("searcher count must be in [0, N]");
  if (anomaly_earliest < 1 || anomaly_latest < anomaly_earliest) throw ConfigError("bad anomaly window");
  if (duration <= anomaly_latest) throw ConfigError("duration must exceed the anomaly window");
  if (idleness_start < 0 || idleness_start > duration) throw ConfigError("idleness start outside trial");
  if (!(max_speed > 0.0)) throw ConfigError("max speed must be > 0");
  if (replan_interval < 1) throw ConfigError("replan interval must be >= 1");
  if (!(comm_range.meters > 0.0)) throw ConfigError("communication range must be > 0");
}

std::vector<std::vector<std::size_t>> communicate(std::span<const Position> positions, CommRange range) {
  const std::size_t n = positions.size();
  std::vector<std::vector<std::size_t>> heard(n);
  if (range.is_global()) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t s = 0; s < n; ++s) {
        if (s != r) heard[r].push_back(s);
      }
    }
    return heard;
  }
  std::vector<double> xs(n);
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = positions[i].x;
    ys[i] = positions[i].y;
  }
  std::vector<std::uint8_t> mask(n);
  const double r2 = range.meters * range.meters;
  for (std::size_t r = 0; r < n; ++r) {
    simd::within_range(xs, ys, xs[r], ys[r], r2, mask);
    for (std::size_t s = 0; s < n; ++s) {
      if (s != r && mask[s]) heard[r].push_back(s);
    }
  }
  return heard;
}

void IdlenessAccumulator::sample(const patrol::IdlenessLedger& truth, int now) {
  if (now < start_ || now > duration_ || truth.size() == 0) return;
  double total = 0.0;
  for (std::size_t n = 0; n < truth.size(); ++n) total += truth.perceived_idleness(n, now);
  sum_ += total / static_cast<double>(truth.size());
}

double IdlenessAccumulator::average() const { return sum_ / static_cast<double>(duration_ - start_ + 1); }

std::vector<std::size_t> start_nodes(std::size_t nodes, std::size_t agents) {
  std::vector<std::size_t> out(agents);
  for (std::size_t i = 0; i < agents; ++i) out[i] = (i * nodes) / agents;
  return out;
}

template <typename... Args>
void Trial::emit(int agent, std::string_view fmt_str, const Args&... args) {
  if (trace_ == nullptr) return;
  *trace_ << "t=" << now_ << " agent=" << agent << ' '
          << fmt::vformat(fmt::string_view(fmt_str.data(), fmt_str.size()), fmt::make_format_args(args...)) << '\n';
}

Trial::Trial(const TrialConfig& cfg, const world::GridMap& map, const world::PatrolGraph& graph,
             const signal::SignalMap& sm, std::ostream* trace)
    : cfg_(cfg),
      map_(map),
      graph_(graph),
      sm_(sm),
      trace_(trace),
      rng_(cfg.seed),
      truth_(graph.size()),
      idleness_(cfg.idleness_start, cfg.duration) {
  cfg_.validate();
  if (sm.width() != map.width() || sm.height() != map.height() || sm.meters_per_cell() != map.meters_per_cell()) {
    throw ConfigError("signal map does not match the grid map");
  }
  if (graph.size() == 0) throw ConfigError("patrol graph is empty");

  // Fixed draw order: anomaly time, then role selection.
  t_appear_ = static_cast<int>(rng_.uniform_int(cfg_.anomaly_earliest, cfg_.anomaly_latest));

  const auto n = static_cast<std::size_t>(cfg_.agents);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = 0; i < static_cast<std::size_t>(cfg_.searchers); ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng_.uniform_below(n - i));
    std::swap(order[i], order[j]);
  }
  std::vector<char> is_searcher(n, 0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(cfg_.searchers); ++i) is_searcher[order[i]] = 1;

  const auto starts = start_nodes(graph.size(), n);
  agents_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Agent& a = agents_[i];
    a.id = static_cast<int>(i);
    a.role = is_searcher[i] ? Role::Searcher : Role::Patroller;
    a.can_measure = a.role == Role::Searcher || cfg_.patrollers_measure;
    a.pos = graph.node(starts[i]).pos;
    a.at_node = starts[i];
    a.ledger = patrol::IdlenessLedger(graph.size());
    a.intentions = patrol::IntentionBoard(n);
    emit(a.id, "start node={} role={}", graph.node(starts[i]).id,
         a.role == Role::Searcher ? "searcher" : "patroller");
  }
  emit(-1, "anomaly_scheduled t_appear={}", t_appear_);
}

void Trial::step() {
  if (finished()) return;
  ++now_;
  if (!t_found_ && now_ >= t_appear_) {
    if (!emitter_active_) emit(-1, "anomaly_appear");
    emitter_active_ = true;
  }
  sense();
  exchange();
  decide();
  move();
  idleness_.sample(truth_, now_);
}

void Trial::sense() {
  const double threshold = sm_.params().found_threshold_dbm;
  bool found_now = false;
  for (Agent& a : agents_) {
    a.last_reading.reset();
    if (!a.can_measure || !emitter_active_) continue;
    a.last_reading = signal::sample_rssi(sm_, a.pos);
    std::optional<search::Reading> own;
    if (a.last_reading) own = search::Reading{a.pos, *a.last_reading};
    const bool knew = a.knowledge.found;
    a.knowledge = search::update_knowledge(a.knowledge, a.id, own, {}, threshold);
    if (a.last_reading && *a.last_reading >= threshold) {
      found_now = true;
      emit(a.id, "found dbm={:.4f}", *a.last_reading);
    } else if (!knew && a.knowledge.found) {
      emit(a.id, "learn_found");
    }
  }
  if (found_now) {
    if (!t_found_) t_found_ = now_;
    emitter_active_ = false;
  }
}

void Trial::exchange() {
  std::vector<Position> positions;
  positions.reserve(agents_.size());
  for (const Agent& a : agents_) positions.push_back(a.pos);
  const auto heard = communicate(positions, cfg_.comm_range);
  listeners_.assign(agents_.size(), {});
  for (std::size_t r = 0; r < heard.size(); ++r) {
    for (std::size_t s : heard[r]) listeners_[s].push_back(r);
  }

  std::vector<Message> outbox(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const Agent& a = agents_[i];
    Message& m = outbox[i];
    m.sender = a.id;
    m.pos = a.pos;
    m.gbest = a.knowledge.gbest;
    m.found = a.knowledge.found;
    if (a.mode == Mode::Patrolling) m.intention = a.goal_node ? a.goal_node : a.at_node;
    m.visit_reports = a.pending_reports;
  }
  // Reports stay pending until somebody hears them.
  std::vector<char> delivered(agents_.size(), 0);
  for (const auto& senders : heard) {
    for (std::size_t s : senders) delivered[s] = 1;
  }
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (delivered[i]) agents_[i].pending_reports.clear();
  }

  const double threshold = sm_.params().found_threshold_dbm;
  for (std::size_t r = 0; r < agents_.size(); ++r) {
    Agent& a = agents_[r];
    a.heard_positions.clear();
    std::vector<search::BestReport> reports;
    bool told_found = false;
    for (std::size_t s : heard[r]) {
      const Message& m = outbox[s];
      a.heard_positions.push_back(m.pos);
      if (m.gbest) reports.push_back(*m.gbest);
      told_found = told_found || m.found;
      a.intentions.set(s, m.intention);
      for (const VisitReport& v : m.visit_reports) {
        if (a.ledger.merge_visit_report(v.node, v.time)) a.pending_reports.push_back(v);
      }
    }
    const bool knew = a.knowledge.found;
    a.knowledge = search::update_knowledge(a.knowledge, a.id, std::nullopt, reports, threshold);
    a.knowledge.found = a.knowledge.found || told_found;
    if (!knew && a.knowledge.found) emit(a.id, "learn_found");
  }
}

void Trial::start_patrol_leg(Agent& a, std::size_t node) {
  a.goal_node = node;
  a.at_node.reset();
  // The new intention reaches this step's listeners before they decide.
  const auto self = static_cast<std::size_t>(a.id);
  if (self < listeners_.size()) {
    for (std::size_t r : listeners_[self]) agents_[r].intentions.set(self, node);
  }
  a.path = world::route(map_, a.pos, graph_.node(node).pos);
  a.next_waypoint = 1;
}

void Trial::revert_to_patrol(Agent& a) {
  a.mode = Mode::Patrolling;
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < graph_.size(); ++n) {
    const double d = distance(a.pos, graph_.node(n).pos);
    if (d < best) {
      best = d;
      nearest = n;
    }
  }
  start_patrol_leg(a, nearest);
  emit(a.id, "revert node={}", graph_.node(nearest).id);
}

void Trial::propose_search_goal(Agent& a, search::SearchMode mode) {
  ++a.search_proposals;
  a.steps_since_proposal = 0;
  a.path = {};
  a.next_waypoint = 0;

  Position goal;
  bool repulsed = false;
  if (mode == search::SearchMode::Pso) {
    const auto p = search::pso_propose(a.pos, a.pso, a.knowledge, a.heard_positions, cfg_.pso, rng_);
    a.pso = p.state;
    goal = p.goal;
    repulsed = p.repulsed;
  } else {
    const auto e = search::ecoli_propose(a.pos, a.ecoli, a.last_reading, cfg_.ecoli, rng_);
    a.ecoli = e.state;
    goal = e.goal;
  }
  const auto projected = world::project_goal(map_, a.pos, goal, repulsed);
  if (!projected) {
    emit(a.id, "propose alg={} goal={:.4f},{:.4f} stay", mode == search::SearchMode::Pso ? "pso" : "ecoli", goal.x,
         goal.y);
    return;
  }
  try {
    a.path = world::route(map_, a.pos, *projected);
    a.next_waypoint = 1;
    emit(a.id, "propose alg={} goal={:.4f},{:.4f} target={:.4f},{:.4f}",
         mode == search::SearchMode::Pso ? "pso" : "ecoli", goal.x, goal.y, projected->x, projected->y);
  } catch (const world::NoRouteError&) {
    emit(a.id, "propose alg={} goal={:.4f},{:.4f} unreachable", mode == search::SearchMode::Pso ? "pso" : "ecoli",
         goal.x, goal.y);
  }
}

void Trial::decide() {
  for (Agent& a : agents_) {
    if (a.mode == Mode::Searching && a.knowledge.found) {
      revert_to_patrol(a);
    } else if (a.role == Role::Searcher && a.mode == Mode::Patrolling && !a.knowledge.found && a.knowledge.gbest) {
      a.mode = Mode::Searching;
      a.goal_node.reset();
      a.at_node.reset();
      a.path = {};
      a.next_waypoint = 0;
      a.pso = {};
      a.ecoli = {};
      if (a.last_step.x != 0.0 || a.last_step.y != 0.0) {
        a.ecoli.heading = std::atan2(a.last_step.y, a.last_step.x);
        if (a.ecoli.heading < 0.0) a.ecoli.heading += 2.0 * std::numbers::pi;
      }
      a.steps_since_proposal = cfg_.replan_interval;
      emit(a.id, "search_start");
    }
  }

  std::vector<search::SearchMode> modes(agents_.size(), search::SearchMode::Pso);
  if (cfg_.algorithm == Algorithm::Ecoli) {
    std::fill(modes.begin(), modes.end(), search::SearchMode::Ecoli);
  } else if (cfg_.algorithm == Algorithm::HcPso) {
    std::vector<search::SearcherView> views;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      if (agents_[i].mode == Mode::Searching) {
        views.push_back({agents_[i].id, &agents_[i].knowledge});
        idx.push_back(i);
      }
    }
    const auto assigned = search::hcpso_assign(views);
    for (std::size_t j = 0; j < idx.size(); ++j) modes[idx[j]] = assigned[j];
  }

  for (std::size_t i = 0; i < agents_.size(); ++i) {
    Agent& a = agents_[i];
    if (a.mode == Mode::Patrolling) {
      if (a.at_node) {
        const std::size_t next = patrol::sebs_select(graph_, *a.at_node, a.ledger, a.intentions,
                                                     static_cast<std::size_t>(a.id), now_, a.sebs, cfg_.sebs, rng_);
        start_patrol_leg(a, next);
        emit(a.id, "select node={}", graph_.node(next).id);
      } else if (!a.goal_node) {
        revert_to_patrol(a);
      }
    } else {
      if (a.path_done() || a.steps_since_proposal >= cfg_.replan_interval) {
        propose_search_goal(a, modes[i]);
      } else {
        ++a.steps_since_proposal;
      }
    }
  }
}

void Trial::arrive(Agent& a) {
  const std::size_t node = *a.goal_node;
  a.at_node = node;
  a.goal_node.reset();
  truth_.record_visit(node, now_);
  a.ledger.record_visit(node, now_);
  a.pending_reports.push_back({node, static_cast<double>(now_)});
  emit(a.id, "arrive node={}", graph_.node(node).id);
}

void Trial::move() {
  for (Agent& a : agents_) {
    const Position before = a.pos;
    double budget = cfg_.max_speed;
    while (budget > 0.0 && !a.path_done()) {
      const Position target = a.path.waypoints[a.next_waypoint];
      const double d = distance(a.pos, target);
      if (d <= budget) {
        a.pos = target;
        budget -= d;
        ++a.next_waypoint;
      } else {
        a.pos = a.pos + (budget / d) * (target - a.pos);
        budget = 0.0;
      }
    }
    a.last_step = a.pos - before;
    if (a.mode == Mode::Patrolling && a.goal_node && a.path_done()) arrive(a);
  }
}

TrialResult Trial::result() const {
  TrialResult r;
  r.avg_idleness = idleness_.average();
  r.t_appear = t_appear_;
  r.seed = cfg_.seed;
  if (t_found_) {
    r.success = true;
    r.ttf = *t_found_ - t_appear_;
  }
  return r;
}

TrialResult run_trial(const TrialConfig& cfg, const world::GridMap& map, const world::PatrolGraph& graph,
                      const signal::SignalMap& sm, std::ostream* trace) {
  Trial trial(cfg, map, graph, sm, trace);
  while (!trial.finished()) trial.step();
  return trial.result();
}

}  // namespace hetpatrol::engine
