#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hetpatrol/rng.hpp"
#include "hetpatrol/worldmap.hpp"

namespace hetpatrol::patrol {

/// Per-agent record of when each patrol node was last visited (as far as
/// that agent knows). Indexed by graph node index; all entries start at 0.
class IdlenessLedger {
 public:
  explicit IdlenessLedger(std::size_t nodes) : last_visit_(nodes, 0.0) {}

  std::size_t size() const { return last_visit_.size(); }
  double last_visit(std::size_t node) const { return last_visit_.at(node); }

  /// now - last visit. Throws std::out_of_range for an unknown node.
  double perceived_idleness(std::size_t node, double now) const { return now - last_visit_.at(node); }

  void record_visit(std::size_t node, double now) { last_visit_.at(node) = now; }

  /// Adopts a reported visit time if it is newer. Returns true if adopted.
  bool merge_visit_report(std::size_t node, double reported_time);

  friend bool operator==(const IdlenessLedger&, const IdlenessLedger&) = default;

 private:
  std::vector<double> last_visit_;
};

/// Last intention heard from each other agent (stale entries allowed).
class IntentionBoard {
 public:
  explicit IntentionBoard(std::size_t agents) : intended_(agents) {}

  void set(std::size_t agent, std::optional<std::size_t> node) { intended_.at(agent) = node; }
  std::optional<std::size_t> get(std::size_t agent) const { return intended_.at(agent); }

  /// Number of agents other than `self` currently intending `node`.
  int count_intending(std::size_t node, std::size_t self) const;

 private:
  std::vector<std::optional<std::size_t>> intended_;
};

struct SebsParams {
  // Likelihood assigned to the largest gain seen so far.
  double likelihood_max = 4.0;
};

/// Running maximum of the gains an agent has evaluated in this trial.
struct SebsState {
  double max_gain = 0.0;
};

/// Posterior score for one candidate: exp(gain * ln(L_max) / max_gain) * 2^-intending.
double sebs_posterior(double gain, double max_gain, int intending, const SebsParams& params);

/// State Exchange Bayesian Strategy next-node choice among the neighbors of
/// `at`. gain = perceived idleness / edge length; argmax posterior; exact
/// ties broken uniformly with `rng` (one draw only when a tie exists).
std::size_t sebs_select(const world::PatrolGraph& graph, std::size_t at, const IdlenessLedger& ledger,
                        const IntentionBoard& intentions, std::size_t self, double now, SebsState& state,
                        const SebsParams& params, CounterRng& rng);

}  // namespace hetpatrol::patrol
