#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hetpatrol/geometry.hpp"
#include "hetpatrol/rng.hpp"

namespace hetpatrol::search {

struct Reading {
  Position pos;
  double dbm = 0.0;
};

/// A global-best claim as carried in messages.
struct BestReport {
  Position pos;
  double dbm = 0.0;
  int reporter = 0;
};

/// True if a should replace b as global best: stronger, or equal strength
/// from a lower reporter id.
bool better_report(const BestReport& a, const BestReport& b);

struct SwarmKnowledge {
  std::optional<Reading> pbest;
  std::optional<BestReport> gbest;
  bool found = false;
};

/// Folds the agent's own reading (if any) and heard gbest reports into its
/// knowledge. `found` becomes true once any incorporated reading reaches the
/// threshold and never resets.
SwarmKnowledge update_knowledge(SwarmKnowledge k, int self, std::optional<Reading> own_reading,
                                std::span<const BestReport> heard, double found_threshold_dbm);

struct PsoParams {
  double cognitive = 1.0;
  double social = 2.5;
  double inertia = 0.7;
  double repulsion_strength = 2.0;  // meters per update at zero separation
  double repulsion_radius = 3.0;    // meters
  double max_step = 2.0;            // cap on |velocity|, meters per update
};

struct PsoState {
  Vec2 velocity;
};

struct PsoProposal {
  Position goal;
  bool repulsed = false;  // repulsion term was non-zero
  PsoState state;
};

/// Sum over neighbors of strength * max(0, 1 - d/radius) * unit(pos - n).
/// Neighbors at exactly `pos` contribute nothing.
Vec2 repulsion(Position pos, std::span<const Position> neighbors, const PsoParams& params);

/// Charged PSO velocity update. Consumes four uniform draws (r1.x, r1.y,
/// r2.x, r2.y). A missing pbest contributes no cognitive pull. Throws
/// std::invalid_argument without a gbest.
PsoProposal pso_propose(Position pos, const PsoState& state, const SwarmKnowledge& k,
                        std::span<const Position> neighbors, const PsoParams& params, CounterRng& rng);

struct EcoliParams {
  double step_length = 1.0;  // meters
};

struct EcoliState {
  double heading = 0.0;  // radians in [0, 2pi)
  std::optional<double> prev_reading;  // dBm; -inf stands for below floor
};

struct EcoliProposal {
  Position goal;
  EcoliState state;
  bool reversed = false;
  int turn = 0;  // +1: +45 deg, -1: -45 deg, 0: none
};

/// Chemotaxis step with an explicit uniform draw u in [0, 1): reverse when
/// the reading got worse, then turn +45 deg if u < 0.25, -45 deg if u < 0.5.
/// A nullopt reading is below the detection floor and compares as -inf.
EcoliProposal ecoli_step(Position pos, const EcoliState& state, std::optional<double> reading, double u,
                         const EcoliParams& params);

/// ecoli_step with u drawn from rng (one draw).
EcoliProposal ecoli_propose(Position pos, const EcoliState& state, std::optional<double> reading,
                            const EcoliParams& params, CounterRng& rng);

enum class SearchMode { Pso, Ecoli };

struct SearcherView {
  int id = 0;
  const SwarmKnowledge* knowledge = nullptr;
};

/// HC-PSO role split among actively searching agents: an agent whose own
/// pbest matches its believed gbest runs ECOLI, the rest PSO. If no agent
/// qualifies, the agent(s) with the strongest pbest run ECOLI (lowest id when
/// nobody has a pbest), so at least one searcher is always chemotactic.
std::vector<SearchMode> hcpso_assign(std::span<const SearcherView> agents);

}  // namespace hetpatrol::search
