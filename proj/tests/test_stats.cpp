#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hetpatrol/rng.hpp"
#include "hetpatrol/stats.hpp"
#include "oracles/oracles.hpp"

using namespace hetpatrol;
using namespace hetpatrol::analysis;

namespace {

// Two-sided permutation p for small samples: every split of the pooled values.
double brute_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size();
  const double mean = a.size() * b.size() / 2.0;
  const double obs = std::abs(oracle::pair_count_u(a, b) - mean);
  std::size_t hits = 0, total = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != a.size()) continue;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? x : y).push_back(pooled[i]);
    ++total;
    if (std::abs(oracle::pair_count_u(x, y) - mean) >= obs - 1e-9) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<double> sample(CounterRng& rng, std::size_t n, int levels) {
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(static_cast<double>(rng.uniform_below(static_cast<std::uint64_t>(levels))));
  return v;
}

}  // namespace

TEST_CASE("mann-whitney examples") {
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  const auto m = mann_whitney(a, b);
  CHECK(m.u == 0.0);
  CHECK(m.r == 1.0);
  CHECK(m.exact);
  CHECK(m.p == doctest::Approx(0.1));

  const auto same = mann_whitney(a, a);
  CHECK(same.r == 0.0);
  CHECK(same.p == doctest::Approx(1.0));

  CHECK_THROWS_AS(mann_whitney(a, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("mann-whitney normal approximation matches reference values") {
  const std::vector<double> a{1.1, 2.3, 3.0, 4.8, 5.5, 6.1, 7.7, 8.2, 9.0, 10.4};
  const std::vector<double> b{3.3, 5.0, 6.6, 7.1, 8.8, 9.9, 11.2, 12.5, 13.0, 14.4, 15.1};
  const auto m = mann_whitney(a, b);
  CHECK_FALSE(m.exact);
  CHECK(m.u == 24.0);
  CHECK(m.p == doctest::Approx(0.03173399375689655).epsilon(1e-9));

  const std::vector<double> c{1, 2, 2, 3, 3, 3, 4, 5, 6, 7};
  const std::vector<double> d{2, 3, 3, 4, 4, 5, 6, 6, 7, 8, 9, 9};
  const auto t = mann_whitney(c, d);
  CHECK(t.u == 32.0);
  CHECK(t.p == doctest::Approx(0.06702829155522932).epsilon(1e-9));
}

TEST_CASE("U equals pair counting and U_ab + U_ba = na*nb") {
  CounterRng rng(2718);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = sample(rng, 1 + rng.uniform_below(30), 12);
    const auto b = sample(rng, 1 + rng.uniform_below(30), 12);
    const auto ab = mann_whitney(a, b);
    const auto ba = mann_whitney(b, a);
    CHECK(ab.u == oracle::pair_count_u(a, b));
    CHECK(ab.u + ba.u == static_cast<double>(a.size() * b.size()));
    CHECK(ab.r == doctest::Approx(-ba.r));
    CHECK(ab.p == doctest::Approx(ba.p).epsilon(1e-12));
    CHECK(ab.p >= 0.0);
    CHECK(ab.p <= 1.0);
  }
}

TEST_CASE("exact p equals brute-force permutation enumeration") {
  CounterRng rng(99);
  for (int trial = 0; trial < 150; ++trial) {
    const auto a = sample(rng, 1 + rng.uniform_below(6), 5);
    const auto b = sample(rng, 1 + rng.uniform_below(8), 5);
    const auto m = mann_whitney(a, b);
    REQUIRE(m.exact);
    CHECK(m.p == doctest::Approx(brute_exact_p(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("fisher examples") {
  const auto f = fisher_exact({5, 0, 0, 5});
  CHECK(f.p == doctest::Approx(2.0 / 252.0).epsilon(1e-12));
  CHECK(std::isinf(f.odds_ratio));
  const auto g = fisher_exact({3, 3, 3, 3});
  CHECK(g.p == doctest::Approx(1.0));
  CHECK(g.odds_ratio == 1.0);
  CHECK(fisher_exact({2, 4, 6, 1}).odds_ratio == doctest::Approx(2.0 / 24.0));
  CHECK_THROWS_AS(fisher_exact({0, 0, 3, 4}), std::invalid_argument);
  CHECK_THROWS_AS(fisher_exact({0, 3, 0, 4}), std::invalid_argument);
  CHECK_THROWS_AS(fisher_exact({-1, 3, 2, 4}), std::invalid_argument);
}

TEST_CASE("fisher p equals hypergeometric enumeration for margins up to 12") {
  int tables = 0;
  for (int a = 0; a <= 12; ++a) {
    for (int b = 0; a + b <= 12; ++b) {
      for (int c = 0; a + c <= 12; ++c) {
        for (int d = 0; c + d <= 12 && b + d <= 12; ++d) {
          if (a + b == 0 || c + d == 0 || a + c == 0 || b + d == 0) continue;
          const double p = fisher_exact({a, b, c, d}).p;
          const double expect = oracle::fisher_p(a, b, c, d);
          if (std::abs(p - expect) > 1e-9) {
            FAIL_CHECK("fisher mismatch at " << a << " " << b << " " << c << " " << d << ": " << p << " vs "
                                              << expect);
          }
          ++tables;
        }
      }
    }
  }
  CHECK(tables > 1000);
}

TEST_CASE("fisher p is invariant under transpose and double swap") {
  CounterRng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = static_cast<std::int64_t>(rng.uniform_below(20)) + 1;
    const auto b = static_cast<std::int64_t>(rng.uniform_below(20));
    const auto c = static_cast<std::int64_t>(rng.uniform_below(20));
    const auto d = static_cast<std::int64_t>(rng.uniform_below(20)) + 1;
    const double p = fisher_exact({a, b, c, d}).p;
    CHECK(fisher_exact({a, c, b, d}).p == doctest::Approx(p).epsilon(1e-12));
    CHECK(fisher_exact({d, c, b, a}).p == doctest::Approx(p).epsilon(1e-12));
  }
}
