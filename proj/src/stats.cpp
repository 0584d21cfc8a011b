#include "hetpatrol/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace hetpatrol::analysis {

namespace {

// Midranks of the pooled sample, doubled so they stay integral.
std::vector<std::int64_t> doubled_midranks(const std::vector<double>& pooled, double& tie_term) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
  std::vector<std::int64_t> ranks(n);
  tie_term = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[idx[j + 1]] == pooled[idx[i]]) ++j;
    // ranks i+1 .. j+1, doubled mean = i + j + 2
    for (std::size_t m = i; m <= j; ++m) ranks[idx[m]] = static_cast<std::int64_t>(i + j + 2);
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

MannWhitney mann_whitney(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney: empty sample");
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const std::size_t n = na + nb;

  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  double tie_term = 0.0;
  const auto ranks = doubled_midranks(pooled, tie_term);

  std::int64_t sum2_a = 0;
  for (std::size_t i = 0; i < na; ++i) sum2_a += ranks[i];
  const double dna = static_cast<double>(na);
  const double dnb = static_cast<double>(nb);

  MannWhitney out;
  out.u = static_cast<double>(sum2_a) / 2.0 - dna * (dna + 1.0) / 2.0;
  out.r = 1.0 - 2.0 * out.u / (dna * dnb);
  const double mean_u = dna * dnb / 2.0;

  if (std::min(na, nb) < 8) {
    out.exact = true;
    // Distribution of the doubled rank sum of a random subset of size m.
    const bool a_small = na <= nb;
    const std::size_t m = a_small ? na : nb;
    std::int64_t total2 = 0;
    for (auto r : ranks) total2 += r;
    std::int64_t obs2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((i < na) == a_small) obs2 += ranks[i];
    }
    // Largest m doubled ranks bound the sum.
    std::vector<std::int64_t> sorted = ranks;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const std::int64_t max_sum = std::accumulate(sorted.begin(), sorted.begin() + static_cast<long>(m), std::int64_t{0});
    const std::size_t width = static_cast<std::size_t>(max_sum) + 1;
    std::vector<std::vector<long double>> ways(m + 1, std::vector<long double>(width, 0.0L));
    ways[0][0] = 1.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<std::size_t>(ranks[i]);
      for (std::size_t j = std::min(m, i + 1); j >= 1; --j) {
        auto& dst = ways[j];
        const auto& src = ways[j - 1];
        for (std::size_t s = width; s-- > r;) {
          if (src[s - r] != 0.0L) dst[s] += src[s - r];
        }
      }
    }
    const long double expected2 = static_cast<long double>(m) * static_cast<long double>(total2) / static_cast<long double>(n);
    const long double dev_obs = std::fabs(static_cast<long double>(obs2) - expected2);
    long double tail = 0.0L;
    long double all = 0.0L;
    for (std::size_t s = 0; s < width; ++s) {
      if (ways[m][s] == 0.0L) continue;
      all += ways[m][s];
      if (std::fabs(static_cast<long double>(s) - expected2) >= dev_obs - 1e-9L) tail += ways[m][s];
    }
    out.p = std::min(1.0, static_cast<double>(tail / all));
    return out;
  }

  const double dn = static_cast<double>(n);
  const double var = dna * dnb / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (!(var > 0.0)) {
    out.p = 1.0;
    return out;
  }
  const double dev = std::max(0.0, std::fabs(out.u - mean_u) - 0.5);
  const double z = dev / std::sqrt(var);
  out.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return out;
}

namespace {

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

FisherResult fisher_exact(const Table2x2& t) {
  if (t.a < 0 || t.b < 0 || t.c < 0 || t.d < 0) throw std::invalid_argument("fisher_exact: negative count");
  const std::int64_t r1 = t.a + t.b;
  const std::int64_t r2 = t.c + t.d;
  const std::int64_t c1 = t.a + t.c;
  const std::int64_t c2 = t.b + t.d;
  if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0) throw std::invalid_argument("fisher_exact: zero margin");
  const std::int64_t n = r1 + r2;

  FisherResult out;
  const double ad = static_cast<double>(t.a) * static_cast<double>(t.d);
  const double bc = static_cast<double>(t.b) * static_cast<double>(t.c);
  out.odds_ratio = bc == 0.0 ? std::numeric_limits<double>::infinity() : ad / bc;

  const double log_denom = log_choose(n, c1);
  auto prob = [&](std::int64_t x) { return std::exp(log_choose(r1, x) + log_choose(r2, c1 - x) - log_denom); };
  const double p_obs = prob(t.a);
  const std::int64_t lo = std::max<std::int64_t>(0, c1 - r2);
  const std::int64_t hi = std::min(r1, c1);
  double p = 0.0;
  for (std::int64_t x = lo; x <= hi; ++x) {
    const double px = prob(x);
    if (px <= p_obs * (1.0 + 1e-7)) p += px;
  }
  out.p = std::min(1.0, p);
  return out;
}

}  // namespace hetpatrol::analysis
