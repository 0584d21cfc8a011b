#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hetpatrol/engine.hpp"
#include "hetpatrol/experiments.hpp"
#include "hetpatrol/stats.hpp"

namespace hetpatrol::analysis {

enum class DistributionClass { AllPatrol, PatrolSkew, FiftyFifty, SearchSkew, AllSearch };

std::string_view to_string(DistributionClass c);

/// Patroller:searcher grouping for k searchers out of n agents.
/// Throws std::invalid_argument for odd n or k outside [0, n].
DistributionClass classify(int n, int k);

struct Label {
  engine::Algorithm algorithm = engine::Algorithm::Pso;
  DistributionClass cls = DistributionClass::AllPatrol;
  bool patrollers_measure = true;

  /// e.g. "pso/PatrolSkew/pm=true"
  std::string to_string() const;
  friend auto operator<=>(const Label&, const Label&) = default;
};

struct NormalizedRow {
  Label label;
  std::size_t record = 0;  // index into the input records
  double idleness_norm = 0.0;
  double ttf_norm = 0.0;
};

struct Normalization {
  std::vector<NormalizedRow> rows;
  std::vector<std::string> warnings;
};

/// Min-max normalizes `v` in place. Returns false (and zeroes `v`) when all
/// values are equal.
bool min_max_normalize(std::span<double> v);

/// Per (map, N) group min-max normalization of idleness and TTF. Censored
/// TTF takes the group's largest observed TTF first (or 1 when the group
/// has no success at all). Error rows are skipped with a warning.
Normalization normalize(std::span<const experiments::TrialRecord> records);

/// Median of a non-empty sample (mean of the middle pair for even sizes).
double median(std::vector<double> v);

struct ObjectivePoint {
  double idleness = 0.0;
  double ttf = 0.0;
  Label label;
};

/// Per-label medians of the normalized metrics, in label order.
std::vector<ObjectivePoint> label_medians(std::span<const NormalizedRow> rows);

struct ParetoResult {
  std::vector<std::size_t> front;  // indices into the input, ascending
  std::size_t knee = 0;
};

/// Non-dominated subset and the member closest to the origin (ties: lower
/// ttf, then lower idleness, then lower index). Throws on empty input.
ParetoResult pareto_front(std::span<const ObjectivePoint> points);

struct BootstrapEntry {
  Label label;
  std::int64_t knee_count = 0;
  std::int64_t pareto_count = 0;
};

struct BootstrapSummary {
  std::int64_t resamples = 0;
  std::vector<BootstrapEntry> entries;  // label order

  double knee_frequency(std::size_t i) const;
  double pareto_frequency(std::size_t i) const;
};

/// Resamples rows with replacement, recomputes label medians, front and knee.
/// Resample r uses its own generator seeded from (seed, r), so the result is
/// independent of `threads`.
BootstrapSummary bootstrap(std::span<const NormalizedRow> rows, int resamples, std::uint64_t seed, int threads = 1);

struct SuccessRate {
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  double fraction() const { return static_cast<double>(successes) / static_cast<double>(trials); }
};

/// Successes among records accepted by `keep` (error rows never count).
/// Throws std::invalid_argument when nothing matches.
SuccessRate success_rate(std::span<const experiments::TrialRecord> records,
                         const std::function<bool(const experiments::TrialRecord&)>& keep);

Label label_of(const experiments::TrialRecord& r);

struct AnalysisOptions {
  int resamples = 10000;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct AnalysisReport {
  std::vector<ObjectivePoint> medians;
  ParetoResult pareto;
  BootstrapSummary boot;
  std::vector<std::string> warnings;
};

/// Full pipeline; writes pareto.csv, bootstrap.csv, tests.csv, success.csv
/// and pareto.svg into `out_dir`.
AnalysisReport analyze(std::span<const experiments::TrialRecord> records, const std::filesystem::path& out_dir,
                       const AnalysisOptions& opts);

// Report writers, exposed for tests.
std::string pareto_csv(const std::vector<ObjectivePoint>& medians, const ParetoResult& pareto);
std::string bootstrap_csv(const BootstrapSummary& boot);
std::string tests_csv(std::span<const experiments::TrialRecord> records, std::span<const NormalizedRow> rows);
std::string success_csv(std::span<const experiments::TrialRecord> records);
std::string pareto_svg(const std::vector<ObjectivePoint>& medians, const ParetoResult& pareto);

}  // namespace hetpatrol::analysis
