#include "hetpatrol/patrol.hpp"

#include <cmath>

namespace hetpatrol::patrol {

bool IdlenessLedger::merge_visit_report(std::size_t node, double reported_time) {
  double& t = last_visit_.at(node);
  if (reported_time > t) {
    t = reported_time;
    return true;
  }
  return false;
}

int IntentionBoard::count_intending(std::size_t node, std::size_t self) const {
  int n = 0;
  for (std::size_t a = 0; a < intended_.size(); ++a) {
    if (a != self && intended_[a] && *intended_[a] == node) ++n;
  }
  return n;
}

double sebs_posterior(double gain, double max_gain, int intending, const SebsParams& params) {
  const double likelihood = max_gain > 0.0 ? std::exp(gain * std::log(params.likelihood_max) / max_gain) : 1.0;
  return likelihood * std::exp2(-static_cast<double>(intending));
}

std::size_t sebs_select(const world::PatrolGraph& graph, std::size_t at, const IdlenessLedger& ledger,
                        const IntentionBoard& intentions, std::size_t self, double now, SebsState& state,
                        const SebsParams& params, CounterRng& rng) {
  const auto nbrs = graph.neighbors(at);
  if (nbrs.empty()) throw world::MapError("sebs_select: node has no neighbors");
  if (nbrs.size() == 1) return nbrs.front().node;

  std::vector<double> gains;
  gains.reserve(nbrs.size());
  for (const auto& nb : nbrs) {
    const double len = nb.length > 0.0 ? nb.length : 1e-9;
    gains.push_back(ledger.perceived_idleness(nb.node, now) / len);
    state.max_gain = std::max(state.max_gain, gains.back());
  }

  double best = -1.0;
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    const double score =
        sebs_posterior(gains[i], state.max_gain, intentions.count_intending(nbrs[i].node, self), params);
    if (score > best) {
      best = score;
      tied.assign(1, nbrs[i].node);
    } else if (score == best) {
      tied.push_back(nbrs[i].node);
    }
  }
  if (tied.size() == 1) return tied.front();
  return tied[rng.uniform_below(tied.size())];
}

}  // namespace hetpatrol::patrol
