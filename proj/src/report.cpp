#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <fmt/core.h>

#include "hetpatrol/analysis.hpp"

namespace hetpatrol::analysis {

namespace {

using experiments::TrialRecord;

std::string fmt_p(double p) { return fmt::format("{:.6g}", p); }

std::string fmt_or(double v) { return std::isinf(v) ? std::string("inf") : fmt::format("{:.4f}", v); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  f << text;
}

constexpr DistributionClass kClasses[] = {DistributionClass::AllPatrol, DistributionClass::PatrolSkew,
                                          DistributionClass::FiftyFifty, DistributionClass::SearchSkew,
                                          DistributionClass::AllSearch};

}  // namespace

std::string pareto_csv(const std::vector<ObjectivePoint>& medians, const ParetoResult& pareto) {
  const std::set<std::size_t> on(pareto.front.begin(), pareto.front.end());
  std::string out = "label,idleness_norm_median,ttf_norm_median,on_front,is_knee\n";
  for (std::size_t i = 0; i < medians.size(); ++i) {
    out += fmt::format("{},{:.4f},{:.4f},{},{}\n", medians[i].label.to_string(), medians[i].idleness, medians[i].ttf,
                       on.count(i) ? "true" : "false", i == pareto.knee ? "true" : "false");
  }
  return out;
}

std::string bootstrap_csv(const BootstrapSummary& boot) {
  std::string out = "label,knee_freq,pareto_freq,knee_count,pareto_count,resamples\n";
  for (std::size_t i = 0; i < boot.entries.size(); ++i) {
    const auto& e = boot.entries[i];
    out += fmt::format("{},{:.4f},{:.4f},{},{},{}\n", e.label.to_string(), boot.knee_frequency(i),
                       boot.pareto_frequency(i), e.knee_count, e.pareto_count, boot.resamples);
  }
  return out;
}

std::string tests_csv(std::span<const TrialRecord> records, std::span<const NormalizedRow> rows) {
  std::string out = "comparison,test,statistic,p_value,effect\n";

  // Mann-Whitney between every pair of classes within (algorithm, pm).
  // TTF uses successful trials only.
  std::map<Label, std::pair<std::vector<double>, std::vector<double>>> by;
  for (const auto& r : rows) {
    auto& s = by[r.label];
    s.first.push_back(r.idleness_norm);
    if (records[r.record].success) s.second.push_back(r.ttf_norm);
  }
  for (auto alg : {engine::Algorithm::Pso, engine::Algorithm::HcPso, engine::Algorithm::Ecoli}) {
    for (bool pm : {true, false}) {
      for (std::size_t i = 0; i < std::size(kClasses); ++i) {
        for (std::size_t j = i + 1; j < std::size(kClasses); ++j) {
          const auto a = by.find(Label{alg, kClasses[i], pm});
          const auto b = by.find(Label{alg, kClasses[j], pm});
          if (a == by.end() || b == by.end()) continue;
          const std::string id = fmt::format("{}/pm={}:{}_vs_{}", engine::to_string(alg), pm ? "true" : "false",
                                             to_string(kClasses[i]), to_string(kClasses[j]));
          const auto emit = [&](std::string_view metric, const std::vector<double>& x, const std::vector<double>& y) {
            if (x.empty() || y.empty()) {
              out += fmt::format("{}:{},mann_whitney,NA,NA,NA\n", metric, id);
              return;
            }
            const auto mw = mann_whitney(x, y);
            out += fmt::format("{}:{},mann_whitney,{:.4f},{},{:.4f}\n", metric, id, mw.u, fmt_p(mw.p), mw.r);
          };
          emit("idleness", a->second.first, b->second.first);
          emit("ttf", a->second.second, b->second.second);
        }
      }
    }
  }

  // Fisher's exact test on success counts per communication range.
  std::set<std::string> ranges;
  for (const auto& r : records) ranges.insert(r.key.comm_range.to_string());
  for (auto alg : {engine::Algorithm::Pso, engine::Algorithm::HcPso, engine::Algorithm::Ecoli}) {
    for (bool pm : {true, false}) {
      for (const auto& range : ranges) {
        for (auto cls : {DistributionClass::PatrolSkew, DistributionClass::FiftyFifty, DistributionClass::SearchSkew}) {
          auto pick = [&](DistributionClass c) {
            return [&, c](const TrialRecord& r) {
              return r.key.algorithm == alg && r.key.patrollers_measure == pm && r.key.comm_range.to_string() == range &&
                     label_of(r).cls == c;
            };
          };
          const std::string id = fmt::format("success:{}/pm={}/range={}:{}_vs_AllSearch", engine::to_string(alg),
                                             pm ? "true" : "false", range, to_string(cls));
          SuccessRate x;
          SuccessRate y;
          try {
            x = success_rate(records, pick(cls));
            y = success_rate(records, pick(DistributionClass::AllSearch));
          } catch (const std::invalid_argument&) {
            continue;
          }
          try {
            const auto f = fisher_exact({x.successes, x.trials - x.successes, y.successes, y.trials - y.successes});
            out += fmt::format("{},fisher_exact_sample_or,{},{},\n", id, fmt_or(f.odds_ratio), fmt_p(f.p));
          } catch (const std::invalid_argument&) {
            out += fmt::format("{},fisher_exact_sample_or,NA,NA,\n", id);
          }
        }
      }
    }
  }
  return out;
}

std::string success_csv(std::span<const TrialRecord> records) {
  struct Key {
    Label label;
    std::string range;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, SuccessRate> by;
  for (const auto& r : records) {
    if (r.outcome == experiments::Outcome::Error) continue;
    auto& s = by[Key{label_of(r), r.key.comm_range.to_string()}];
    ++s.trials;
    if (r.success) ++s.successes;
  }
  std::string out = "label,comm_range,successes,trials,rate\n";
  for (const auto& [k, s] : by) {
    out += fmt::format("{},{},{},{},{:.4f}\n", k.label.to_string(), k.range, s.successes, s.trials, s.fraction());
  }
  return out;
}

std::string pareto_svg(const std::vector<ObjectivePoint>& medians, const ParetoResult& pareto) {
  constexpr double size = 640.0;
  constexpr double margin = 70.0;
  constexpr double plot = size - 2.0 * margin;
  auto px = [&](double x) { return margin + x * plot; };
  auto py = [&](double y) { return size - margin - y * plot; };

  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      size);
  s += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
                   margin, margin, plot, plot);
  for (int t = 0; t <= 4; ++t) {
    const double v = t / 4.0;
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.2f}</text>\n", px(v), size - margin + 16,
                     v);
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.2f}</text>\n", margin - 6, py(v) + 4, v);
  }
  s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"13\">TTF (normalized, 0 = best)</text>\n",
                   size / 2.0, size - 20.0);
  s += fmt::format(
      "<text x=\"20\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 20 {:.1f})\">"
      "Idleness (normalized, 0 = best)</text>\n",
      size / 2.0, size / 2.0);

  std::vector<std::size_t> front = pareto.front;
  std::sort(front.begin(), front.end(), [&](std::size_t a, std::size_t b) {
    return medians[a].ttf < medians[b].ttf || (medians[a].ttf == medians[b].ttf && medians[a].idleness > medians[b].idleness);
  });
  std::string poly;
  for (std::size_t i : front) poly += fmt::format("{:.2f},{:.2f} ", px(medians[i].ttf), py(medians[i].idleness));
  s += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n", poly);

  for (std::size_t i = 0; i < medians.size(); ++i) {
    const auto& m = medians[i];
    s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"steelblue\"><title>{}</title></circle>\n",
                     px(m.ttf), py(m.idleness), m.label.to_string());
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"8\" fill=\"dimgray\">{}</text>\n", px(m.ttf) + 5,
                     py(m.idleness) - 5, m.label.to_string());
  }
  if (!medians.empty()) {
    const auto& k = medians[pareto.knee];
    s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"9\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>\n",
                     px(k.ttf), py(k.idleness));
  }
  s += "</svg>\n";
  return s;
}

AnalysisReport analyze(std::span<const TrialRecord> records, const std::filesystem::path& out_dir,
                       const AnalysisOptions& opts) {
  const auto norm = normalize(records);
  if (norm.rows.empty()) throw std::invalid_argument("analyze: no usable records");
  AnalysisReport rep;
  rep.warnings = norm.warnings;
  rep.medians = label_medians(norm.rows);
  rep.pareto = pareto_front(rep.medians);
  rep.boot = bootstrap(norm.rows, opts.resamples, opts.seed, opts.threads);

  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "pareto.csv", pareto_csv(rep.medians, rep.pareto));
  write_text(out_dir / "bootstrap.csv", bootstrap_csv(rep.boot));
  write_text(out_dir / "tests.csv", tests_csv(records, norm.rows));
  write_text(out_dir / "success.csv", success_csv(records));
  write_text(out_dir / "pareto.svg", pareto_svg(rep.medians, rep.pareto));
  return rep;
}

}  // namespace hetpatrol::analysis
