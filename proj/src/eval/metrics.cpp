#include "preflab/eval/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "preflab/core/discretize.hpp"
#include "preflab/ml/stats.hpp"

namespace preflab::eval {

void PredictionRun::check() const {
  if (predicted.size() != truth.size()) throw std::invalid_argument(predictor_name + ": prediction and truth ids differ");
  for (auto a = predicted.begin(), b = truth.begin(); a != predicted.end(); ++a, ++b)
    if (a->first != b->first) throw std::invalid_argument(predictor_name + ": prediction and truth ids differ at '" + a->first + "'");
}

PredictionRun make_run(const std::string& name, const std::map<std::string, double>& scores,
                       const std::map<std::string, double>& truth, const std::vector<std::string>& ids) {
  PredictionRun run;
  run.predictor_name = name;
  auto add = [&](const std::string& id) {
    auto t = truth.find(id);
    if (t == truth.end()) throw std::invalid_argument("no ground truth for '" + id + "'");
    auto s = scores.find(id);
    if (s == scores.end()) throw std::invalid_argument(name + " has no score for '" + id + "'");
    run.truth[id] = t->second;
    run.predicted[id] = s->second;
  };
  if (ids.empty())
    for (const auto& [id, _] : truth) add(id);
  else
    for (const auto& id : ids) add(id);
  return run;
}

double mae(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("mae: length mismatch");
  if (pred.empty()) throw std::invalid_argument("mae of an empty run");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - truth[i]);
  return s / static_cast<double>(pred.size());
}

double mae(const PredictionRun& run) {
  run.check();
  std::vector<double> p, t;
  for (const auto& [id, v] : run.predicted) {
    p.push_back(v);
    t.push_back(run.truth.at(id));
  }
  return mae(p, t);
}

PredictionRun fair_discretize(const PredictionRun& run) {
  PredictionRun out = run;
  for (auto& [_, v] : out.predicted) v = clip_and_round(v).value();
  out.discretized = true;
  return out;
}

double retest_deviation(const std::map<std::string, double>& original, const std::map<std::string, double>& retest) {
  if (original.size() != retest.size()) throw std::invalid_argument("retest: id sets differ");
  std::vector<double> a, b;
  for (const auto& [id, v] : original) {
    auto it = retest.find(id);
    if (it == retest.end()) throw std::invalid_argument("retest: no retest rating for '" + id + "'");
    a.push_back(v);
    b.push_back(it->second);
  }
  return mae(a, b);
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = ml::mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

WinImprovement win_improvement_table(const std::vector<std::pair<double, double>>& pairs) {
  WinImprovement out;
  if (pairs.empty()) return out;
  std::vector<double> cand;
  double imp = 0.0;
  for (const auto& [base, c] : pairs) {
    cand.push_back(c);
    if (std::abs(base - c) <= kTieTolerance) ++out.ties;
    else if (c < base) ++out.wins;
    else ++out.losses;
    imp += base > 0 ? (base - c) / base : 0.0;
  }
  out.mean = ml::mean(cand);
  out.std = sample_std(cand);
  out.imp = imp / static_cast<double>(pairs.size());
  if (out.wins + out.losses > 0) out.win = static_cast<double>(out.wins) / static_cast<double>(out.wins + out.losses);
  return out;
}

BestHumanWins best_human_win_count(const std::map<std::string, double>& candidate,
                                   const std::map<std::string, std::vector<double>>& humans) {
  BestHumanWins out;
  for (const auto& [target, c] : candidate) {
    auto it = humans.find(target);
    if (it == humans.end() || it->second.empty()) continue;
    ++out.targets;
    double best = it->second.front();
    for (double h : it->second) best = std::min(best, h);
    if (c < best) ++out.wins;
  }
  if (out.targets) out.rate = static_cast<double>(out.wins) / static_cast<double>(out.targets);
  return out;
}

BiasResult bias_correlation(const std::vector<BiasRecord>& records) {
  BiasResult out;
  out.n = records.size();
  if (records.size() < 2) {
    out.zero_variance = true;
    return out;
  }
  std::vector<double> e, d;
  for (const auto& r : records) {
    e.push_back(r.e());
    d.push_back(r.d());
  }
  const auto c = ml::pearson(e, d);
  out.r = c.r;
  out.zero_variance = c.zero_variance;
  return out;
}

}  // namespace preflab::eval
