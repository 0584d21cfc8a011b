#include "hetpatrol/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hetpatrol::search {

bool better_report(const BestReport& a, const BestReport& b) {
  return a.dbm > b.dbm || (a.dbm == b.dbm && a.reporter < b.reporter);
}

SwarmKnowledge update_knowledge(SwarmKnowledge k, int self, std::optional<Reading> own_reading,
                                std::span<const BestReport> heard, double found_threshold_dbm) {
  auto offer = [&](const BestReport& r) {
    if (!k.gbest || better_report(r, *k.gbest)) k.gbest = r;
    if (r.dbm >= found_threshold_dbm) k.found = true;
  };
  if (own_reading) {
    if (!k.pbest || own_reading->dbm > k.pbest->dbm) k.pbest = own_reading;
    offer({own_reading->pos, own_reading->dbm, self});
  }
  for (const BestReport& r : heard) offer(r);
  return k;
}

Vec2 repulsion(Position pos, std::span<const Position> neighbors, const PsoParams& params) {
  Vec2 total;
  if (params.repulsion_radius <= 0.0) return total;
  for (const Position& n : neighbors) {
    const Vec2 away = pos - n;
    const double d = norm(away);
    if (d == 0.0 || d >= params.repulsion_radius) continue;
    total += (params.repulsion_strength * (1.0 - d / params.repulsion_radius)) * unit(away);
  }
  return total;
}

PsoProposal pso_propose(Position pos, const PsoState& state, const SwarmKnowledge& k,
                        std::span<const Position> neighbors, const PsoParams& params, CounterRng& rng) {
  if (!k.gbest) throw std::invalid_argument("pso_propose: no global best (search not triggered)");
  const double r1x = rng.uniform01();
  const double r1y = rng.uniform01();
  const double r2x = rng.uniform01();
  const double r2y = rng.uniform01();

  const Vec2 to_pbest = k.pbest ? k.pbest->pos - pos : Vec2{};
  const Vec2 to_gbest = k.gbest->pos - pos;
  const Vec2 rep = repulsion(pos, neighbors, params);

  Vec2 v = params.inertia * state.velocity;
  v += Vec2{params.cognitive * r1x * to_pbest.x, params.cognitive * r1y * to_pbest.y};
  v += Vec2{params.social * r2x * to_gbest.x, params.social * r2y * to_gbest.y};
  v += rep;

  const double speed = norm(v);
  if (speed > params.max_step) v = (params.max_step / speed) * v;

  PsoProposal out;
  out.goal = pos + v;
  out.repulsed = rep.x != 0.0 || rep.y != 0.0;
  out.state.velocity = v;
  return out;
}

namespace {

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  if (a >= two_pi) a = 0.0;
  return a;
}

}  // namespace

EcoliProposal ecoli_step(Position pos, const EcoliState& state, std::optional<double> reading, double u,
                         const EcoliParams& params) {
  const double now = reading.value_or(-std::numeric_limits<double>::infinity());
  EcoliProposal out;
  double heading = state.heading;
  if (state.prev_reading && now < *state.prev_reading) {
    heading += std::numbers::pi;
    out.reversed = true;
  }
  if (u < 0.25) {
    heading += std::numbers::pi / 4.0;
    out.turn = 1;
  } else if (u < 0.5) {
    heading -= std::numbers::pi / 4.0;
    out.turn = -1;
  }
  out.state.heading = wrap_angle(heading);
  out.state.prev_reading = now;
  out.goal = pos + Vec2{params.step_length * std::cos(out.state.heading),
                        params.step_length * std::sin(out.state.heading)};
  return out;
}

EcoliProposal ecoli_propose(Position pos, const EcoliState& state, std::optional<double> reading,
                            const EcoliParams& params, CounterRng& rng) {
  return ecoli_step(pos, state, reading, rng.uniform01(), params);
}

std::vector<SearchMode> hcpso_assign(std::span<const SearcherView> agents) {
  std::vector<SearchMode> modes(agents.size(), SearchMode::Pso);
  bool any = false;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const SwarmKnowledge& k = *agents[i].knowledge;
    if (k.pbest && k.gbest && k.pbest->dbm == k.gbest->dbm) {
      modes[i] = SearchMode::Ecoli;
      any = true;
    }
  }
  if (any || agents.empty()) return modes;

  double strongest = -std::numeric_limits<double>::infinity();
  for (const auto& a : agents) {
    if (a.knowledge->pbest) strongest = std::max(strongest, a.knowledge->pbest->dbm);
  }
  if (strongest == -std::numeric_limits<double>::infinity()) {
    std::size_t lowest = 0;
    for (std::size_t i = 1; i < agents.size(); ++i) {
      if (agents[i].id < agents[lowest].id) lowest = i;
    }
    modes[lowest] = SearchMode::Ecoli;
    return modes;
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].knowledge->pbest && agents[i].knowledge->pbest->dbm == strongest) modes[i] = SearchMode::Ecoli;
  }
  return modes;
}

}  // namespace hetpatrol::search
