#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace hetpatrol::analysis {

struct MannWhitney {
  double u = 0.0;  // for sample a: #(a > b) + ties / 2
  double p = 1.0;  // two-sided
  double r = 0.0;  // rank-biserial, 1 - 2U/(na*nb); positive when a tends smaller
  bool exact = false;
};

/// Exact permutation distribution of U (with midrank ties) when
/// min(na, nb) < 8, otherwise normal approximation with tie and continuity
/// correction. Throws std::invalid_argument on an empty sample.
MannWhitney mann_whitney(std::span<const double> a, std::span<const double> b);

struct Table2x2 {
  std::int64_t a = 0, b = 0;  // row 1
  std::int64_t c = 0, d = 0;  // row 2
};

struct FisherResult {
  double odds_ratio = 0.0;  // (a*d)/(b*c); +inf when b*c == 0
  double p = 1.0;           // two-sided
};

/// Throws std::invalid_argument on negative counts or a zero row/column margin.
FisherResult fisher_exact(const Table2x2& t);

}  // namespace hetpatrol::analysis
