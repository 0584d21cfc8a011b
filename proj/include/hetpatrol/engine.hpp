#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hetpatrol/geometry.hpp"
#include "hetpatrol/patrol.hpp"
#include "hetpatrol/rng.hpp"
#include "hetpatrol/search.hpp"
#include "hetpatrol/signalmodel.hpp"
#include "hetpatrol/worldmap.hpp"

namespace hetpatrol::engine {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Algorithm { Pso, HcPso, Ecoli };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);

/// Euclidean communication radius; infinite means global.
struct CommRange {
  double meters = std::numeric_limits<double>::infinity();

  static CommRange global() { return {}; }
  static CommRange of(double m) { return {m}; }
  bool is_global() const { return meters == std::numeric_limits<double>::infinity(); }

  /// "global" or fixed 4-decimal meters.
  std::string to_string() const;
  static CommRange parse(std::string_view s);
  friend bool operator==(CommRange, CommRange) = default;
};

enum class Role { Patroller, Searcher };
enum class Mode { Patrolling, Searching };

struct TrialConfig {
  std::string map_id;
  std::string source_id;
  int agents = 6;
  int searchers = 0;
  Algorithm algorithm = Algorithm::Pso;
  CommRange comm_range;
  bool patrollers_measure = true;
  std::uint64_t seed = 0;

  int duration = 2000;
  double max_speed = 0.4;  // m per timestep
  int anomaly_earliest = 400;
  int anomaly_latest = 600;
  int idleness_start = 250;
  int replan_interval = 5;

  patrol::SebsParams sebs;
  search::PsoParams pso;
  search::EcoliParams ecoli;

  void validate() const;
};

struct TrialResult {
  double avg_idleness = 0.0;
  std::optional<int> ttf;  // nullopt: censored
  bool success = false;
  int t_appear = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

struct VisitReport {
  std::size_t node = 0;
  double time = 0.0;
};

/// Per-timestep broadcast.
struct Message {
  int sender = 0;
  Position pos;
  std::optional<search::BestReport> gbest;
  bool found = false;
  std::optional<std::size_t> intention;
  std::vector<VisitReport> visit_reports;
};

struct Agent {
  int id = 0;
  Role role = Role::Patroller;
  bool can_measure = false;
  Position pos;
  Mode mode = Mode::Patrolling;

  // patrol
  std::optional<std::size_t> at_node;
  std::optional<std::size_t> goal_node;
  patrol::IdlenessLedger ledger{0};
  patrol::IntentionBoard intentions{0};
  patrol::SebsState sebs;
  std::vector<VisitReport> pending_reports;

  // navigation
  world::Path path;
  std::size_t next_waypoint = 0;
  Vec2 last_step;

  // search
  search::SwarmKnowledge knowledge;
  search::PsoState pso;
  search::EcoliState ecoli;
  std::optional<double> last_reading;
  int steps_since_proposal = 0;
  std::vector<Position> heard_positions;

  // counters for inspection
  int search_proposals = 0;

  bool path_done() const { return next_waypoint >= path.waypoints.size(); }
};

/// For each receiver, the senders whose message it gets: |pi - pj| <= range,
/// self excluded, ascending sender order.
std::vector<std::vector<std::size_t>> communicate(std::span<const Position> positions, CommRange range);

/// Running average of the mean ground-truth idleness, sampled once per
/// timestep from `start` to `duration` inclusive.
class IdlenessAccumulator {
 public:
  IdlenessAccumulator(int start, int duration) : start_(start), duration_(duration) {}

  void sample(const patrol::IdlenessLedger& truth, int now);
  double average() const;

 private:
  int start_;
  int duration_;
  double sum_ = 0.0;
};

/// Evenly spaced start nodes: agent i starts on node floor(i * nodes / agents).
std::vector<std::size_t> start_nodes(std::size_t nodes, std::size_t agents);

/// One simulation run. Each timestep executes sense, communicate, decide and
/// move as global phases with agents in id order. A patrol choice made in the
/// decide phase is delivered at once to the agents that heard its maker in
/// this step's exchange, so later deciders see it.
class Trial {
 public:
  Trial(const TrialConfig& cfg, const world::GridMap& map, const world::PatrolGraph& graph,
        const signal::SignalMap& sm, std::ostream* trace = nullptr);

  bool finished() const { return now_ >= cfg_.duration; }
  void step();
  int now() const { return now_; }
  int t_appear() const { return t_appear_; }
  std::optional<int> t_found() const { return t_found_; }
  bool emitter_active() const { return emitter_active_; }
  const std::vector<Agent>& agents() const { return agents_; }
  const patrol::IdlenessLedger& ground_truth() const { return truth_; }
  std::uint64_t rng_draws() const { return rng_.draws(); }

  TrialResult result() const;

 private:
  void sense();
  void exchange();
  void decide();
  void move();

  void start_patrol_leg(Agent& a, std::size_t node);
  void revert_to_patrol(Agent& a);
  void propose_search_goal(Agent& a, search::SearchMode mode);
  void arrive(Agent& a);
  template <typename... Args>
  void emit(int agent, std::string_view fmt_str, const Args&... args);

  TrialConfig cfg_;
  const world::GridMap& map_;
  const world::PatrolGraph& graph_;
  const signal::SignalMap& sm_;
  std::ostream* trace_;

  CounterRng rng_;
  std::vector<Agent> agents_;
  std::vector<std::vector<std::size_t>> listeners_;  // per sender, who heard it this step
  patrol::IdlenessLedger truth_;
  IdlenessAccumulator idleness_;
  int now_ = 0;
  int t_appear_ = 0;
  std::optional<int> t_found_;
  bool emitter_active_ = false;
};

TrialResult run_trial(const TrialConfig& cfg, const world::GridMap& map, const world::PatrolGraph& graph,
                      const signal::SignalMap& sm, std::ostream* trace = nullptr);

}  // namespace hetpatrol::engine
