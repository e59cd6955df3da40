#include "preflab/eval/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "preflab/eval/multiple_testing.hpp"
#include "preflab/ml/stats.hpp"

namespace preflab::eval {

PredictionRun giaa_baseline(const RatingsMatrix& ratings, const std::string& target) {
  if (ratings.size() < 2) throw std::invalid_argument("giaa baseline needs at least two participants");
  auto t = ratings.find(target);
  if (t == ratings.end()) throw std::invalid_argument("unknown participant '" + target + "'");
  PredictionRun run;
  run.predictor_name = "GIAA";
  run.truth = t->second;
  for (const auto& [id, _] : t->second) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [p, r] : ratings) {
      if (p == target) continue;
      auto it = r.find(id);
      if (it == r.end()) continue;
      sum += it->second;
      ++n;
    }
    if (n == 0) throw std::invalid_argument("no other participant rated '" + id + "'");
    run.predicted[id] = sum / static_cast<double>(n);
  }
  return fair_discretize(run);
}

std::vector<double> rating_values() {
  std::vector<double> v;
  for (int k = 2; k <= 10; ++k) v.push_back(k / 2.0);
  return v;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<RegionStratum> regionwise_diff(const std::vector<std::pair<PredictionRun, PredictionRun>>& pairs,
                                           Alternative alt) {
  std::vector<RegionStratum> strata;
  for (double g : rating_values()) strata.push_back(RegionStratum{.rating = g});
  for (const auto& [a, b] : pairs) {
    a.check();
    b.check();
    if (a.truth != b.truth) throw std::invalid_argument("regionwise: runs disagree on ids or truth");
    for (const auto& [id, truth] : a.truth) {
      const long k = std::lround(truth * 2.0) - 2;
      if (k < 0 || k > 8 || std::abs(truth * 2.0 - std::round(truth * 2.0)) > 1e-9)
        throw std::invalid_argument("regionwise: ground truth off the rating grid for '" + id + "'");
      strata[static_cast<std::size_t>(k)].deltas.push_back(std::abs(a.predicted.at(id) - truth) -
                                                          std::abs(b.predicted.at(id) - truth));
    }
  }

  std::vector<std::size_t> tested;
  std::vector<double> raw;
  std::vector<bool> a_worse;  // W+ > W-: |e_A| tends to exceed |e_B|
  for (std::size_t i = 0; i < strata.size(); ++i) {
    auto& s = strata[i];
    s.n = s.deltas.size();
    s.median = median(s.deltas);
    s.mean = s.deltas.empty() ? 0.0 : ml::mean(s.deltas);
    if (s.n < 2) {
      s.skipped = "n<2";
      continue;
    }
    if (std::all_of(s.deltas.begin(), s.deltas.end(), [](double d) { return std::abs(d) <= kZeroTolerance; })) {
      s.skipped = "all_zero";
      continue;
    }
    const auto w = wilcoxon_signed_rank(s.deltas, alt);
    s.test = TestResult{.statistic = w.w_plus, .p_raw = w.p};
    tested.push_back(i);
    raw.push_back(w.p);
    a_worse.push_back(w.w_plus > w.w_minus);
  }
  const auto adj = bh_correct(raw);
  for (std::size_t k = 0; k < tested.size(); ++k) {
    auto& t = *strata[tested[k]].test;
    t.p_adjusted = std::max(adj.p[k], t.p_raw);
    t.significant = t.p_adjusted < kAlpha;
    if (t.significant) t.direction = a_worse[k] ? "B" : "A";
  }
  return strata;
}

std::vector<RegionStratum> regionwise_diff(const PredictionRun& a, const PredictionRun& b, Alternative alt) {
  return regionwise_diff({{a, b}}, alt);
}

nlohmann::json to_json(const TestResult& t) {
  return {{"statistic", t.statistic},
          {"p_raw", t.p_raw},
          {"p_adjusted", t.p_adjusted},
          {"significant", t.significant},
          {"direction", t.direction}};
}

TestResult test_result_from_json(const nlohmann::json& j) {
  return TestResult{.statistic = j.at("statistic").get<double>(),
                    .p_raw = j.at("p_raw").get<double>(),
                    .p_adjusted = j.at("p_adjusted").get<double>(),
                    .significant = j.at("significant").get<bool>(),
                    .direction = j.at("direction").get<std::string>()};
}

nlohmann::json to_json(const RegionStratum& s) {
  nlohmann::json j{{"rating", s.rating}, {"n", s.n}, {"median", s.median}, {"mean", s.mean}, {"deltas", s.deltas}};
  j["test"] = s.test ? to_json(*s.test) : nlohmann::json(nullptr);
  j["skipped"] = s.skipped.empty() ? nlohmann::json(nullptr) : nlohmann::json(s.skipped);
  return j;
}

RegionStratum region_stratum_from_json(const nlohmann::json& j) {
  RegionStratum s;
  s.rating = j.at("rating").get<double>();
  s.n = j.at("n").get<std::size_t>();
  s.median = j.at("median").get<double>();
  s.mean = j.at("mean").get<double>();
  s.deltas = j.at("deltas").get<std::vector<double>>();
  if (!j.at("test").is_null()) s.test = test_result_from_json(j.at("test"));
  if (!j.at("skipped").is_null()) s.skipped = j.at("skipped").get<std::string>();
  return s;
}

}  // namespace preflab::eval
