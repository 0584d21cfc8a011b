#include "hetpatrol/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

#include <fmt/core.h>

#include "hetpatrol/rng.hpp"
#include "hetpatrol/simd/kernels.hpp"

namespace hetpatrol::analysis {

std::string_view to_string(DistributionClass c) {
  switch (c) {
    case DistributionClass::AllPatrol: return "AllPatrol";
    case DistributionClass::PatrolSkew: return "PatrolSkew";
    case DistributionClass::FiftyFifty: return "FiftyFifty";
    case DistributionClass::SearchSkew: return "SearchSkew";
    case DistributionClass::AllSearch: return "AllSearch";
  }
  return "?";
}

DistributionClass classify(int n, int k) {
  if (n <= 0 || n % 2 != 0) throw std::invalid_argument(fmt::format("classify: N={} must be positive and even", n));
  if (k < 0 || k > n) throw std::invalid_argument(fmt::format("classify: k={} outside [0, {}]", k, n));
  if (k == 0) return DistributionClass::AllPatrol;
  if (k == n) return DistributionClass::AllSearch;
  if (2 * k < n) return DistributionClass::PatrolSkew;
  if (2 * k == n) return DistributionClass::FiftyFifty;
  return DistributionClass::SearchSkew;
}

std::string Label::to_string() const {
  return fmt::format("{}/{}/pm={}", engine::to_string(algorithm), analysis::to_string(cls),
                     patrollers_measure ? "true" : "false");
}

Label label_of(const experiments::TrialRecord& r) {
  return {r.key.algorithm, classify(r.key.agents, r.key.searchers), r.key.patrollers_measure};
}

bool min_max_normalize(std::span<double> v) {
  if (v.empty()) return true;
  double lo = 0.0;
  double hi = 0.0;
  simd::min_max(v, lo, hi);
  if (!(hi > lo)) {
    std::fill(v.begin(), v.end(), 0.0);
    return false;
  }
  simd::rescale(v, lo, hi - lo, v);
  return true;
}

Normalization normalize(std::span<const experiments::TrialRecord> records) {
  Normalization out;
  std::map<std::pair<std::string, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].outcome == experiments::Outcome::Error) {
      out.warnings.push_back(fmt::format("skipping error row {}", records[i].key.to_string()));
      continue;
    }
    groups[{records[i].key.map, records[i].key.agents}].push_back(i);
  }

  for (const auto& [group, members] : groups) {
    const std::string gname = fmt::format("{}/N={}", group.first, group.second);
    std::vector<double> idle;
    std::vector<double> ttf;
    double max_ttf = -1.0;
    for (std::size_t i : members) {
      idle.push_back(records[i].avg_idleness);
      if (records[i].ttf) max_ttf = std::max(max_ttf, static_cast<double>(*records[i].ttf));
    }
    for (std::size_t i : members) ttf.push_back(records[i].ttf ? static_cast<double>(*records[i].ttf) : max_ttf);

    if (!min_max_normalize(idle)) out.warnings.push_back(fmt::format("{}: idleness has a single value", gname));
    if (max_ttf < 0.0) {
      out.warnings.push_back(fmt::format("{}: no successful trial, TTF set to 1 (worst)", gname));
      std::fill(ttf.begin(), ttf.end(), 1.0);
    } else if (!min_max_normalize(ttf)) {
      out.warnings.push_back(fmt::format("{}: TTF has a single value", gname));
    }
    for (std::size_t j = 0; j < members.size(); ++j) {
      out.rows.push_back({label_of(records[members[j]]), members[j], idle[j], ttf[j]});
    }
  }
  std::sort(out.rows.begin(), out.rows.end(),
            [](const NormalizedRow& a, const NormalizedRow& b) { return a.record < b.record; });
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty sample");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
  return (lower + upper) / 2.0;
}

namespace {

std::vector<ObjectivePoint> medians_by_label(std::span<const NormalizedRow> rows, std::span<const std::size_t> pick) {
  std::map<Label, std::pair<std::vector<double>, std::vector<double>>> by;
  auto add = [&](const NormalizedRow& r) {
    auto& slot = by[r.label];
    slot.first.push_back(r.idleness_norm);
    slot.second.push_back(r.ttf_norm);
  };
  if (pick.empty()) {
    for (const auto& r : rows) add(r);
  } else {
    for (std::size_t i : pick) add(rows[i]);
  }
  std::vector<ObjectivePoint> out;
  for (auto& [label, v] : by) out.push_back({median(std::move(v.first)), median(std::move(v.second)), label});
  return out;
}

}  // namespace

std::vector<ObjectivePoint> label_medians(std::span<const NormalizedRow> rows) { return medians_by_label(rows, {}); }

ParetoResult pareto_front(std::span<const ObjectivePoint> points) {
  if (points.empty()) throw std::invalid_argument("pareto_front: no points");
  const std::size_t n = points.size();
  std::vector<double> xs(n);
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = points[i].ttf;
    ys[i] = points[i].idleness;
  }
  std::vector<std::uint8_t> dom(n);
  simd::dominated(xs, ys, dom);

  ParetoResult out;
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (dom[i]) continue;
    out.front.push_back(i);
    const double d = std::sqrt(xs[i] * xs[i] + ys[i] * ys[i]);
    if (out.front.size() == 1) {
      best = d;
      out.knee = i;
      continue;
    }
    const std::size_t k = out.knee;
    if (d < best || (d == best && (xs[i] < xs[k] || (xs[i] == xs[k] && ys[i] < ys[k])))) {
      best = d;
      out.knee = i;
    }
  }
  return out;
}

double BootstrapSummary::knee_frequency(std::size_t i) const {
  return static_cast<double>(entries.at(i).knee_count) / static_cast<double>(resamples);
}

double BootstrapSummary::pareto_frequency(std::size_t i) const {
  return static_cast<double>(entries.at(i).pareto_count) / static_cast<double>(resamples);
}

BootstrapSummary bootstrap(std::span<const NormalizedRow> rows, int resamples, std::uint64_t seed, int threads) {
  if (rows.empty()) throw std::invalid_argument("bootstrap: no rows");
  if (resamples < 1) throw std::invalid_argument("bootstrap: resamples must be >= 1");

  BootstrapSummary out;
  out.resamples = resamples;
  std::map<Label, std::size_t> slot;
  for (const auto& r : rows) slot.emplace(r.label, 0);
  for (auto& [label, idx] : slot) {
    idx = out.entries.size();
    out.entries.push_back({label, 0, 0});
  }

  const int nthreads = std::max(1, std::min(threads, resamples));
  std::vector<std::vector<std::int64_t>> knee(nthreads, std::vector<std::int64_t>(out.entries.size(), 0));
  std::vector<std::vector<std::int64_t>> front(nthreads, std::vector<std::int64_t>(out.entries.size(), 0));

  auto work = [&](int t) {
    std::vector<std::size_t> pick(rows.size());
    for (int r = t; r < resamples; r += nthreads) {
      CounterRng rng(hash_combine(seed, static_cast<std::uint64_t>(r)));
      for (auto& p : pick) p = static_cast<std::size_t>(rng.uniform_below(rows.size()));
      const auto pts = medians_by_label(rows, pick);
      const auto res = pareto_front(pts);
      for (std::size_t i : res.front) ++front[t][slot.at(pts[i].label)];
      ++knee[t][slot.at(pts[res.knee].label)];
    }
  };
  if (nthreads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (int t = 0; t < nthreads; ++t) {
    for (std::size_t i = 0; i < out.entries.size(); ++i) {
      out.entries[i].knee_count += knee[t][i];
      out.entries[i].pareto_count += front[t][i];
    }
  }
  return out;
}

SuccessRate success_rate(std::span<const experiments::TrialRecord> records,
                         const std::function<bool(const experiments::TrialRecord&)>& keep) {
  SuccessRate out;
  for (const auto& r : records) {
    if (r.outcome == experiments::Outcome::Error || !keep(r)) continue;
    ++out.trials;
    if (r.success) ++out.successes;
  }
  if (out.trials == 0) throw std::invalid_argument("success_rate: no matching trials");
  return out;
}

}  // namespace hetpatrol::analysis
