#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "hetpatrol/analysis.hpp"
#include "oracles/oracles.hpp"

using namespace hetpatrol;
using namespace hetpatrol::analysis;
using experiments::Outcome;
using experiments::TrialRecord;

namespace {

TrialRecord rec(std::string map, int n, int k, double idle, std::optional<int> ttf,
                engine::Algorithm alg = engine::Algorithm::Pso, bool pm = true, int rep = 0) {
  TrialRecord r;
  r.key = {std::move(map), n, k, alg, engine::CommRange::global(), pm, 0, rep};
  r.avg_idleness = idle;
  r.ttf = ttf;
  r.success = ttf.has_value();
  r.t_appear = 500;
  return r;
}

std::vector<ObjectivePoint> points(const std::vector<std::pair<double, double>>& xy) {
  std::vector<ObjectivePoint> out;
  for (auto [ttf, idle] : xy) out.push_back({idle, ttf, {}});
  return out;
}

}  // namespace

TEST_CASE("distribution classes") {
  CHECK(classify(6, 0) == DistributionClass::AllPatrol);
  CHECK(classify(6, 1) == DistributionClass::PatrolSkew);
  CHECK(classify(6, 2) == DistributionClass::PatrolSkew);
  CHECK(classify(6, 3) == DistributionClass::FiftyFifty);
  CHECK(classify(6, 4) == DistributionClass::SearchSkew);
  CHECK(classify(6, 5) == DistributionClass::SearchSkew);
  CHECK(classify(6, 6) == DistributionClass::AllSearch);
  CHECK(classify(2, 1) == DistributionClass::FiftyFifty);
  CHECK_THROWS_AS(classify(5, 2), std::invalid_argument);
  CHECK_THROWS_AS(classify(6, 7), std::invalid_argument);
  CHECK(Label{engine::Algorithm::Pso, DistributionClass::PatrolSkew, true}.to_string() == "pso/PatrolSkew/pm=true");
}

TEST_CASE("min-max normalization examples") {
  std::vector<double> v{10, 20, 30};
  CHECK(min_max_normalize(v));
  CHECK(v == std::vector<double>{0, 0.5, 1});
  std::vector<double> flat{7, 7, 7};
  CHECK_FALSE(min_max_normalize(flat));
  CHECK(flat == std::vector<double>{0, 0, 0});
}

TEST_CASE("normalize per group with censored TTF") {
  const std::vector<TrialRecord> rs{
      rec("m", 6, 0, 10, std::nullopt), rec("m", 6, 3, 20, 40), rec("m", 6, 6, 30, 10),
      rec("o", 4, 0, 5, std::nullopt),  rec("o", 4, 4, 9, std::nullopt),
  };
  const auto n = normalize(rs);
  REQUIRE(n.rows.size() == 5);
  CHECK(n.rows[0].idleness_norm == 0.0);
  CHECK(n.rows[0].ttf_norm == 1.0);  // censored gets the group's worst
  CHECK(n.rows[1].idleness_norm == 0.5);
  CHECK(n.rows[1].ttf_norm == 1.0);
  CHECK(n.rows[2].ttf_norm == 0.0);
  CHECK(n.rows[2].idleness_norm == 1.0);
  CHECK(n.rows[3].ttf_norm == 1.0);  // group without any success
  CHECK(n.rows[4].idleness_norm == 1.0);
  CHECK(n.rows[1].label.cls == DistributionClass::FiftyFifty);
  REQUIRE(n.warnings.size() == 1);
  CHECK(n.warnings[0].find("o/N=4") != std::string::npos);
}

TEST_CASE("degenerate groups and error rows warn") {
  auto bad = rec("m", 2, 1, 0, std::nullopt);
  bad.outcome = Outcome::Error;
  const std::vector<TrialRecord> rs{rec("m", 2, 0, 4, std::nullopt), rec("m", 2, 1, 4, 12), bad};
  const auto n = normalize(rs);
  CHECK(n.rows.size() == 2);
  CHECK(n.rows[0].idleness_norm == 0.0);
  CHECK(n.rows[1].idleness_norm == 0.0);
  CHECK(n.warnings.size() == 3);
}

TEST_CASE("normalization is idempotent and order independent") {
  CounterRng rng(17);
  std::vector<TrialRecord> rs;
  for (int i = 0; i < 200; ++i) {
    const int n = 2 * (1 + static_cast<int>(rng.uniform_below(3)));
    const int k = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n) + 1));
    std::optional<int> ttf;
    if (rng.uniform01() < 0.6) ttf = static_cast<int>(rng.uniform_below(1400));
    rs.push_back(rec(rng.uniform01() < 0.5 ? "a" : "b", n, k, 5 + rng.uniform01() * 40, ttf,
                     engine::Algorithm::Pso, true, i));
  }
  const auto base = normalize(rs);

  std::vector<TrialRecord> shuffled(rs.rbegin(), rs.rend());
  std::rotate(shuffled.begin(), shuffled.begin() + 37, shuffled.end());
  const auto other = normalize(shuffled);
  for (const auto& row : other.rows) {
    const auto& r = shuffled[row.record];
    const auto it = std::find_if(base.rows.begin(), base.rows.end(),
                                 [&](const NormalizedRow& b) { return rs[b.record].key.rep == r.key.rep; });
    REQUIRE(it != base.rows.end());
    CHECK(it->idleness_norm == row.idleness_norm);
    CHECK(it->ttf_norm == row.ttf_norm);
  }

  // Renormalize normalized values within each group.
  std::map<std::pair<std::string, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < base.rows.size(); ++i) {
    const auto& r = rs[base.rows[i].record];
    groups[{r.key.map, r.key.agents}].push_back(i);
  }
  for (const auto& [g, idx] : groups) {
    std::vector<double> idle, ttf;
    for (auto i : idx) {
      idle.push_back(base.rows[i].idleness_norm);
      ttf.push_back(base.rows[i].ttf_norm);
    }
    auto idle2 = idle, ttf2 = ttf;
    min_max_normalize(idle2);
    min_max_normalize(ttf2);
    for (std::size_t j = 0; j < idle.size(); ++j) {
      CHECK(idle2[j] == doctest::Approx(idle[j]).epsilon(1e-15));
      CHECK(ttf2[j] == doctest::Approx(ttf[j]).epsilon(1e-15));
      CHECK(idle[j] >= 0.0);
      CHECK(idle[j] <= 1.0);
      CHECK(ttf[j] >= 0.0);
      CHECK(ttf[j] <= 1.0);
    }
  }
}

TEST_CASE("median") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 3, 2}) == 2.5);
  CHECK(median({5}) == 5);
  CHECK_THROWS(median({}));
}

TEST_CASE("pareto examples") {
  SUBCASE("three-way trade-off") {
    const auto r = pareto_front(points({{0, 1}, {1, 0}, {0.4, 0.4}}));
    CHECK(r.front == std::vector<std::size_t>{0, 1, 2});
    CHECK(r.knee == 2);
  }
  SUBCASE("strict dominance") {
    const auto r = pareto_front(points({{0.2, 0.2}, {0.3, 0.3}}));
    CHECK(r.front == std::vector<std::size_t>{0});
    CHECK(r.knee == 0);
  }
  SUBCASE("single point") {
    const auto r = pareto_front(points({{0.7, 0.9}}));
    CHECK(r.front == std::vector<std::size_t>{0});
    CHECK(r.knee == 0);
  }
  SUBCASE("equal distance prefers lower ttf") {
    const auto r = pareto_front(points({{0.6, 0.8}, {0.8, 0.6}}));
    CHECK(r.knee == 0);
    const auto s = pareto_front(points({{0.8, 0.6}, {0.6, 0.8}}));
    CHECK(s.knee == 1);
  }
  SUBCASE("duplicates both stay on the front") {
    const auto r = pareto_front(points({{0.5, 0.5}, {0.5, 0.5}}));
    CHECK(r.front.size() == 2);
    CHECK(r.knee == 0);
  }
  CHECK_THROWS(pareto_front({}));
}

TEST_CASE("pareto front equals brute-force dominance") {
  CounterRng rng(500);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.uniform_below(100);
    std::vector<std::pair<double, double>> xy;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse grid values create ties and duplicates.
      xy.push_back({rng.uniform_below(20) / 19.0, rng.uniform_below(20) / 19.0});
    }
    const auto r = pareto_front(points(xy));
    const auto on = oracle::brute_front(xy);
    std::vector<std::size_t> expect;
    for (std::size_t i = 0; i < n; ++i) {
      if (on[i]) expect.push_back(i);
    }
    CHECK(r.front == expect);
    // Knee: minimum distance over the front.
    double best = 1e9;
    for (auto i : expect) best = std::min(best, std::hypot(xy[i].first, xy[i].second));
    CHECK(std::hypot(xy[r.knee].first, xy[r.knee].second) == doctest::Approx(best).epsilon(1e-15));
    CHECK(on[r.knee]);
  }
}

TEST_CASE("bootstrap examples") {
  SUBCASE("single label") {
    std::vector<NormalizedRow> rows;
    for (std::size_t i = 0; i < 10; ++i) rows.push_back({Label{}, i, i / 10.0, 1 - i / 10.0});
    const auto b = bootstrap(rows, 300, 1);
    REQUIRE(b.entries.size() == 1);
    CHECK(b.knee_frequency(0) == 1.0);
    CHECK(b.pareto_frequency(0) == 1.0);
  }
  SUBCASE("dominating label") {
    std::vector<NormalizedRow> rows;
    const Label good{engine::Algorithm::Pso, DistributionClass::SearchSkew, true};
    const Label bad{engine::Algorithm::Pso, DistributionClass::AllPatrol, true};
    const Label worse{engine::Algorithm::Ecoli, DistributionClass::PatrolSkew, false};
    CounterRng rng(3);
    for (std::size_t i = 0; i < 30; ++i) {
      rows.push_back({good, i, 0.1 * rng.uniform01(), 0.1 * rng.uniform01()});
      rows.push_back({bad, i, 0.5 + 0.5 * rng.uniform01(), 0.5 + 0.5 * rng.uniform01()});
      rows.push_back({worse, i, 0.2 + 0.1 * rng.uniform01(), 0.9});
    }
    const auto b = bootstrap(rows, 2000, 8, 3);
    for (std::size_t i = 0; i < b.entries.size(); ++i) {
      if (b.entries[i].label == good) {
        CHECK(b.knee_frequency(i) == 1.0);
        CHECK(b.pareto_frequency(i) == 1.0);
      } else {
        CHECK(b.pareto_frequency(i) == 0.0);
        CHECK(b.knee_frequency(i) == 0.0);
      }
    }
  }
  CHECK_THROWS(bootstrap({}, 10, 0));
}

TEST_CASE("bootstrap is reproducible and independent of threads") {
  CounterRng rng(12);
  std::vector<NormalizedRow> rows;
  const DistributionClass classes[] = {DistributionClass::AllPatrol, DistributionClass::PatrolSkew,
                                       DistributionClass::FiftyFifty, DistributionClass::SearchSkew,
                                       DistributionClass::AllSearch};
  for (std::size_t i = 0; i < 300; ++i) {
    const Label l{engine::Algorithm::HcPso, classes[rng.uniform_below(5)], rng.uniform01() < 0.5};
    rows.push_back({l, i, rng.uniform01(), rng.uniform01()});
  }
  const auto a = bootstrap(rows, 1000, 77, 1);
  const auto b = bootstrap(rows, 1000, 77, 4);
  const auto c = bootstrap(rows, 1000, 78, 1);
  CHECK(bootstrap_csv(a) == bootstrap_csv(b));
  CHECK(bootstrap_csv(a) != bootstrap_csv(c));
  std::int64_t knees = 0;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    knees += a.entries[i].knee_count;
    CHECK(a.entries[i].pareto_count >= a.entries[i].knee_count);
    CHECK(a.entries[i].pareto_count <= a.resamples);
  }
  CHECK(knees == a.resamples);
}

TEST_CASE("success rate") {
  std::vector<TrialRecord> rs;
  for (int i = 0; i < 15; ++i) rs.push_back(rec("m", 6, 4, 10, i < 14 ? std::optional<int>(30) : std::nullopt));
  auto err = rec("m", 6, 4, 10, std::nullopt);
  err.outcome = Outcome::Error;
  rs.push_back(err);
  const auto s = success_rate(rs, [](const TrialRecord&) { return true; });
  CHECK(s.successes == 14);
  CHECK(s.trials == 15);
  CHECK(s.fraction() == doctest::Approx(0.9333).epsilon(1e-4));
  CHECK_THROWS_AS(success_rate(rs, [](const TrialRecord& r) { return r.key.agents == 2; }), std::invalid_argument);
}

TEST_CASE("report writers") {
  std::vector<TrialRecord> rs;
  for (int rep = 0; rep < 10; ++rep) {
    rs.push_back(rec("m", 2, 0, 10 + rep * 0.1, std::nullopt, engine::Algorithm::Pso, true, rep));
    rs.push_back(rec("m", 2, 1, 14 + rep * 0.1, 80 + rep, engine::Algorithm::Pso, true, rep));
    rs.push_back(rec("m", 2, 2, 18 + rep * 0.1, rep < 7 ? std::optional<int>(20 + rep) : std::nullopt,
                     engine::Algorithm::Pso, true, rep));
  }
  const auto norm = normalize(rs);
  const auto med = label_medians(norm.rows);
  REQUIRE(med.size() == 3);
  CHECK(med[0].label.cls == DistributionClass::AllPatrol);
  CHECK(med[0].idleness == doctest::Approx(0.45 / 8.9));
  CHECK(med[0].ttf == 1.0);
  const auto par = pareto_front(med);

  const auto pcsv = pareto_csv(med, par);
  CHECK(pcsv.rfind("label,idleness_norm_median,ttf_norm_median,on_front,is_knee\n", 0) == 0);
  CHECK(pcsv.find("pso/AllPatrol/pm=true,") != std::string::npos);
  CHECK(std::count(pcsv.begin(), pcsv.end(), '\n') == 4);

  const auto tcsv = tests_csv(rs, norm.rows);
  CHECK(tcsv.find("idleness:pso/pm=true:AllPatrol_vs_FiftyFifty,mann_whitney,") != std::string::npos);
  CHECK(tcsv.find("ttf:pso/pm=true:AllPatrol_vs_FiftyFifty,mann_whitney,NA,NA,NA") != std::string::npos);
  CHECK(tcsv.find("success:pso/pm=true/range=global:FiftyFifty_vs_AllSearch,fisher_exact_sample_or,inf,") !=
        std::string::npos);

  const auto scsv = success_csv(rs);
  CHECK(scsv.find("pso/AllSearch/pm=true,global,7,10,0.7000") != std::string::npos);
  CHECK(scsv.find("pso/AllPatrol/pm=true,global,0,10,0.0000") != std::string::npos);

  const auto svg = pareto_svg(med, par);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("TTF") != std::string::npos);
  CHECK(svg.find("Idleness") != std::string::npos);
  CHECK(svg.find("stroke=\"red\"") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("analyze writes every output") {
  std::vector<TrialRecord> rs;
  for (int rep = 0; rep < 6; ++rep) {
    rs.push_back(rec("m", 2, 0, 10 + rep, std::nullopt, engine::Algorithm::Pso, true, rep));
    rs.push_back(rec("m", 2, 1, 14 + rep, 50 + rep, engine::Algorithm::Pso, true, rep));
    rs.push_back(rec("m", 2, 2, 18 + rep, 10 + rep, engine::Algorithm::Pso, true, rep));
  }
  const auto dir = std::filesystem::temp_directory_path() / "hetpatrol_test_analysis";
  std::filesystem::remove_all(dir);
  const auto rep = analyze(rs, dir, {200, 5, 2});
  for (const char* f : {"pareto.csv", "bootstrap.csv", "tests.csv", "success.csv", "pareto.svg"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  CHECK(rep.boot.resamples == 200);
  CHECK(rep.medians.size() == 3);
  CHECK_THROWS(analyze({}, dir, {}));
}
