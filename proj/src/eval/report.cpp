#include "preflab/eval/report.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "preflab/eval/multiple_testing.hpp"
#include "preflab/ml/stats.hpp"

namespace preflab::eval {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json win_to_json(const WinImprovement& w) {
  return {{"mean", w.mean}, {"std", w.std},       {"win", opt(w.win)}, {"imp", w.imp},
          {"wins", w.wins}, {"losses", w.losses}, {"ties", w.ties}};
}

WinImprovement win_from_json(const json& j) {
  WinImprovement w;
  w.mean = j.at("mean").get<double>();
  w.std = j.at("std").get<double>();
  if (!j.at("win").is_null()) w.win = j.at("win").get<double>();
  w.imp = j.at("imp").get<double>();
  w.wins = j.at("wins").get<std::size_t>();
  w.losses = j.at("losses").get<std::size_t>();
  w.ties = j.at("ties").get<std::size_t>();
  return w;
}

std::string csv_opt(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string alternative_name(Alternative a) {
  switch (a) {
    case Alternative::Greater: return "greater";
    case Alternative::Less: return "less";
    case Alternative::TwoSided: break;
  }
  return "two-sided";
}

Alternative parse_alternative(const std::string& s) {
  if (s == "two-sided") return Alternative::TwoSided;
  if (s == "greater") return Alternative::Greater;
  if (s == "less") return Alternative::Less;
  throw std::invalid_argument("unknown alternative '" + s + "'");
}

std::string fmt_error(double v) { return fmt::format("{:.3f}", v); }
std::string fmt_percent(double v) { return fmt::format("{:.1f}", 100.0 * v); }
std::string fmt_p(double v) { return fmt::format("{:.3g}", v); }

json EvaluationReport::to_json() const {
  json j;
  j["format"] = kReportFormat;
  j["baseline"] = baseline;
  j["discretized"] = discretized;
  j["alternative"] = alternative;
  j["participants"] = participants;
  j["mae"] = mae;
  j["table"] = json::array();
  for (const auto& r : table) {
    j["table"].push_back({{"predictor", r.predictor},
                          {"kind", r.kind},
                          {"participants", r.participants},
                          {"mean", r.mean},
                          {"std", r.std},
                          {"baseline", r.baseline},
                          {"versus", r.versus ? win_to_json(*r.versus) : json(nullptr)},
                          {"test", r.test ? eval::to_json(*r.test) : json(nullptr)}});
  }
  j["regions"] = json::object();
  for (const auto& [name, strata] : regions) {
    auto& arr = j["regions"][name] = json::array();
    for (const auto& s : strata) arr.push_back(eval::to_json(s));
  }
  j["best_human"] = json::array();
  for (const auto& b : best_human)
    j["best_human"].push_back(
        {{"predictor", b.predictor}, {"wins", b.result.wins}, {"targets", b.result.targets}, {"rate", b.result.rate}});
  j["bias"] = json::array();
  for (const auto& b : bias)
    j["bias"].push_back({{"predictor", b.predictor},
                         {"target", b.target},
                         {"r", b.result.r},
                         {"zero_variance", b.result.zero_variance},
                         {"n", b.result.n}});
  j["bias_mean"] = bias_mean;
  return j;
}

EvaluationReport EvaluationReport::from_json(const json& j) {
  if (j.value("format", "") != kReportFormat) throw std::invalid_argument("not a preflab report");
  EvaluationReport r;
  r.baseline = j.at("baseline").get<std::string>();
  r.discretized = j.at("discretized").get<bool>();
  r.alternative = j.at("alternative").get<std::string>();
  r.participants = j.at("participants").get<std::vector<std::string>>();
  r.mae = j.at("mae").get<std::map<std::string, std::map<std::string, double>>>();
  for (const auto& t : j.at("table")) {
    ComparisonRow row;
    row.predictor = t.at("predictor").get<std::string>();
    row.kind = t.at("kind").get<std::string>();
    row.participants = t.at("participants").get<std::size_t>();
    row.mean = t.at("mean").get<double>();
    row.std = t.at("std").get<double>();
    row.baseline = t.at("baseline").get<bool>();
    if (!t.at("versus").is_null()) row.versus = win_from_json(t.at("versus"));
    if (!t.at("test").is_null()) row.test = test_result_from_json(t.at("test"));
    r.table.push_back(std::move(row));
  }
  for (const auto& [name, arr] : j.at("regions").items())
    for (const auto& s : arr) r.regions[name].push_back(region_stratum_from_json(s));
  for (const auto& b : j.at("best_human"))
    r.best_human.push_back({b.at("predictor").get<std::string>(),
                            {b.at("wins").get<std::size_t>(), b.at("targets").get<std::size_t>(),
                             b.at("rate").get<double>()}});
  for (const auto& b : j.at("bias"))
    r.bias.push_back({b.at("predictor").get<std::string>(), b.at("target").get<std::string>(),
                      {b.at("r").get<double>(), b.at("zero_variance").get<bool>(), b.at("n").get<std::size_t>()}});
  r.bias_mean = j.at("bias_mean").get<std::map<std::string, double>>();
  return r;
}

EvaluationReport evaluate(const EvaluationInput& input) {
  EvaluationReport report;
  report.discretized = input.discretize;
  report.alternative = alternative_name(input.alternative);
  for (const auto& [p, _] : input.truth) report.participants.push_back(p);

  std::vector<PredictorScores> predictors = input.predictors;
  std::set<std::string> names;
  for (const auto& p : predictors)
    if (!names.insert(p.predictor_name).second)
      throw std::invalid_argument("duplicate predictor '" + p.predictor_name + "'");
  if (input.include_giaa && input.truth.size() >= 2) {
    if (names.count("GIAA")) throw std::invalid_argument("duplicate predictor 'GIAA'");
    PredictorScores g;
    g.predictor_name = "GIAA";
    g.provenance = "mean of the other participants";
    for (const auto& [p, _] : input.truth) g.by_participant[p] = giaa_baseline(input.truth, p).predicted;
    predictors.push_back(std::move(g));
  }

  // predictor -> participant -> run
  std::map<std::string, std::map<std::string, PredictionRun>> runs;
  for (const auto& pred : predictors) {
    for (const auto& [part, scores] : pred.by_participant) {
      auto t = input.truth.find(part);
      if (t == input.truth.end())
        throw std::invalid_argument(pred.predictor_name + ": no ground truth for participant '" + part + "'");
      if (pred.kind == "human" && part == pred.rater) continue;
      auto ids_it = input.test_ids.find(part);
      const std::vector<std::string> ids = ids_it == input.test_ids.end() ? std::vector<std::string>{} : ids_it->second;
      auto run = make_run(pred.predictor_name, scores, t->second, ids);
      if (input.discretize) run = fair_discretize(run);
      report.mae[pred.predictor_name][part] = mae(run);
      runs[pred.predictor_name][part] = std::move(run);
    }
  }

  const PredictorScores* base = nullptr;
  for (const auto& p : predictors)
    if (input.baseline.empty() ? p.kind != "human" : p.predictor_name == input.baseline) {
      base = &p;
      break;
    }
  if (!base && !input.baseline.empty()) throw std::invalid_argument("unknown baseline '" + input.baseline + "'");
  if (base) report.baseline = base->predictor_name;

  std::vector<std::size_t> tested;
  std::vector<double> raw;
  for (const auto& pred : predictors) {
    const auto& m = report.mae[pred.predictor_name];
    ComparisonRow row;
    row.predictor = pred.predictor_name;
    row.kind = pred.kind;
    row.participants = m.size();
    std::vector<double> values;
    for (const auto& [_, v] : m) values.push_back(v);
    if (!values.empty()) row.mean = ml::mean(values);
    row.std = sample_std(values);
    row.baseline = base && pred.predictor_name == base->predictor_name;
    if (base && !row.baseline) {
      const auto& bm = report.mae[base->predictor_name];
      std::vector<std::pair<double, double>> pairs;
      std::vector<double> diffs;
      for (const auto& [part, v] : m) {
        auto it = bm.find(part);
        if (it == bm.end()) continue;
        pairs.emplace_back(it->second, v);
        diffs.push_back(it->second - v);
      }
      row.versus = win_improvement_table(pairs);
      const bool any = std::any_of(diffs.begin(), diffs.end(), [](double d) { return std::abs(d) > kZeroTolerance; });
      if (diffs.size() >= 2 && any) {
        const auto w = wilcoxon_signed_rank(diffs, input.alternative);
        row.test = TestResult{.statistic = w.w_plus, .p_raw = w.p};
        row.test->direction = w.w_plus > w.w_minus ? "B" : "A";
        tested.push_back(report.table.size());
        raw.push_back(w.p);
      }
    }
    report.table.push_back(std::move(row));
  }
  const auto adj = bh_correct(raw);
  for (std::size_t k = 0; k < tested.size(); ++k) {
    auto& t = *report.table[tested[k]].test;
    t.p_adjusted = std::max(adj.p[k], t.p_raw);
    t.significant = t.p_adjusted < kAlpha;
    if (!t.significant) t.direction = "-";
  }

  if (base) {
    const auto& base_runs = runs[base->predictor_name];
    for (const auto& pred : predictors) {
      if (pred.kind == "human" || pred.predictor_name == base->predictor_name) continue;
      std::vector<std::pair<PredictionRun, PredictionRun>> pairs;
      for (const auto& [part, run] : runs[pred.predictor_name]) {
        auto it = base_runs.find(part);
        if (it != base_runs.end()) pairs.emplace_back(it->second, run);
      }
      if (!pairs.empty()) report.regions[pred.predictor_name] = regionwise_diff(pairs, input.alternative);
    }
  }

  std::map<std::string, std::vector<double>> humans;
  for (const auto& pred : predictors)
    if (pred.kind == "human")
      for (const auto& [part, v] : report.mae[pred.predictor_name]) humans[part].push_back(v);
  if (!humans.empty())
    for (const auto& pred : predictors)
      if (pred.kind != "human")
        report.best_human.push_back({pred.predictor_name, best_human_win_count(report.mae[pred.predictor_name], humans)});

  for (const auto& pred : predictors) {
    if (pred.kind != "human") continue;
    auto own = input.truth.find(pred.rater);
    if (own == input.truth.end()) continue;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [target, run] : runs[pred.predictor_name]) {
      std::vector<BiasRecord> records;
      for (const auto& [id, r_hat] : run.predicted) {
        auto r_p = own->second.find(id);
        if (r_p == own->second.end()) continue;
        records.push_back({r_p->second, run.truth.at(id), r_hat});
      }
      const auto b = bias_correlation(records);
      report.bias.push_back({pred.predictor_name, target, b});
      if (!b.zero_variance) {
        sum += b.r;
        ++n;
      }
    }
    if (n) report.bias_mean[pred.predictor_name] = sum / static_cast<double>(n);
  }
  return report;
}

std::string render_summary(const EvaluationReport& r) {
  std::string out;
  auto line = [&](const std::string& s) { out += s + "\n"; };
  line(fmt::format("Evaluation report: {} participants, baseline {}, {} predictions, {} tests",
                   r.participants.size(), r.baseline.empty() ? "none" : r.baseline,
                   r.discretized ? "discretized" : "raw", r.alternative));
  line("");
  line("Prediction error (MAE)");
  line(fmt::format("{:<24} {:>3} {:>7} {:>7} {:>6} {:>6} {:>8} {:>8}", "predictor", "n", "mean", "std", "win%", "imp%",
                   "p", "p_adj"));
  for (const auto& row : r.table) {
    std::string win = "-", imp = "-", p = "-", p_adj = "-";
    if (row.versus) {
      win = row.versus->win ? fmt_percent(*row.versus->win) : fmt::format("n/a({} ties)", row.versus->ties);
      imp = fmt_percent(row.versus->imp);
    }
    if (row.test) {
      p = fmt_p(row.test->p_raw);
      p_adj = fmt_p(row.test->p_adjusted) + (row.test->significant ? "*" : "");
    }
    line(fmt::format("{:<24} {:>3} {:>7} {:>7} {:>6} {:>6} {:>8} {:>8}", row.predictor + (row.baseline ? " (base)" : ""),
                     row.participants, fmt_error(row.mean), fmt_error(row.std), win, imp, p, p_adj));
  }
  for (const auto& [name, strata] : r.regions) {
    line("");
    line(fmt::format("Region-wise |e_{}| - |e_{}| by ground truth", r.baseline, name));
    line(fmt::format("{:>6} {:>4} {:>8} {:>8} {:>8} {:>4}", "rating", "n", "median", "mean", "p_adj", "sig"));
    for (const auto& s : strata) {
      const std::string p = s.test ? fmt_p(s.test->p_adjusted) : (s.skipped.empty() ? "-" : s.skipped);
      const std::string sig = s.test && s.test->significant ? s.test->direction : "-";
      line(fmt::format("{:>6.1f} {:>4} {:>8} {:>8} {:>8} {:>4}", s.rating, s.n, fmt_error(s.median), fmt_error(s.mean), p,
                       sig));
    }
  }
  if (!r.best_human.empty()) {
    line("");
    line("Wins against the best human predictor");
    for (const auto& b : r.best_human)
      line(fmt::format("{:<24} {}/{} {}", b.predictor, b.result.wins, b.result.targets, fmt_error(b.result.rate)));
  }
  if (!r.bias.empty()) {
    line("");
    line("Correlation between prediction error and own-rating offset");
    for (const auto& b : r.bias)
      line(fmt::format("{:<24} {:<12} {}{}", b.predictor, b.target, fmt_error(b.result.r),
                       b.result.zero_variance ? " (zero variance)" : ""));
    for (const auto& [name, m] : r.bias_mean) line(fmt::format("{:<24} {:<12} {}", name, "mean", fmt_error(m)));
  }
  return out;
}

void write_report(const EvaluationReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", r.to_json().dump(2) + "\n");
  write_text(dir / "summary.txt", render_summary(r));

  std::string t = "predictor,kind,participants,mean,std,baseline,win,imp,wins,losses,ties,p_raw,p_adjusted,significant\n";
  for (const auto& row : r.table) {
    t += fmt::format("{},{},{},{},{},{}", row.predictor, row.kind, row.participants, row.mean, row.std, row.baseline);
    if (row.versus)
      t += fmt::format(",{},{},{},{},{}", csv_opt(row.versus->win), row.versus->imp, row.versus->wins,
                       row.versus->losses, row.versus->ties);
    else
      t += ",,,,,";
    if (row.test)
      t += fmt::format(",{},{},{}\n", row.test->p_raw, row.test->p_adjusted, row.test->significant);
    else
      t += ",,,\n";
  }
  write_text(dir / "table.csv", t);

  std::string m = "predictor,participant,mae\n";
  for (const auto& [name, per] : r.mae)
    for (const auto& [part, v] : per) m += fmt::format("{},{},{}\n", name, part, v);
  write_text(dir / "per_participant_mae.csv", m);

  std::string g = "candidate,rating,n,median,mean,p_raw,p_adjusted,significant,direction,skipped\n";
  for (const auto& [name, strata] : r.regions)
    for (const auto& s : strata) {
      g += fmt::format("{},{},{},{},{}", name, s.rating, s.n, s.median, s.mean);
      if (s.test)
        g += fmt::format(",{},{},{},{},\n", s.test->p_raw, s.test->p_adjusted, s.test->significant, s.test->direction);
      else
        g += fmt::format(",,,,,{}\n", s.skipped);
    }
  write_text(dir / "regions.csv", g);

  std::string b = "predictor,wins,targets,rate\n";
  for (const auto& row : r.best_human)
    b += fmt::format("{},{},{},{}\n", row.predictor, row.result.wins, row.result.targets, row.result.rate);
  write_text(dir / "best_human.csv", b);

  std::string c = "predictor,target,r,n,zero_variance\n";
  for (const auto& row : r.bias)
    c += fmt::format("{},{},{},{},{}\n", row.predictor, row.target, row.result.r, row.result.n, row.result.zero_variance);
  write_text(dir / "bias.csv", c);
}

}  // namespace preflab::eval
