#include "preflab/features/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "preflab/ml/cluster.hpp"
#include "preflab/ml/regressors.hpp"
#include "preflab/ml/stats.hpp"

namespace preflab::features {

void ExplorationConfig::validate() const {
  auto count = [](const char* name, int v) {
    if (v < 1) throw std::invalid_argument(std::string("exploration.") + name + " must be >= 1");
  };
  count("n_candidate", n_candidate);
  count("n_pos", n_pos);
  count("n_neg", n_neg);
  count("n_model", n_model);
  count("n_selection", n_selection);
  count("n_iter_in", n_iter_in);
  count("max_clusters", max_clusters);
  auto unit = [](const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string("exploration.") + name + " must be in [0, 1]");
  };
  unit("a_thre", a_thre);
  unit("r_thre", r_thre);
}

nlohmann::json ExplorationConfig::to_json() const {
  return {{"n_candidate", n_candidate}, {"n_pos", n_pos},         {"n_neg", n_neg},
          {"n_model", n_model},         {"n_selection", n_selection}, {"n_iter_in", n_iter_in},
          {"a_thre", a_thre},           {"r_thre", r_thre},       {"max_clusters", max_clusters},
          {"use_interview", use_interview}, {"complete_matrix", complete_matrix}};
}

ExplorationConfig ExplorationConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{"n_candidate", "n_pos",  "n_neg",        "n_model",
                                           "n_selection", "n_iter_in", "a_thre",    "r_thre",
                                           "max_clusters", "use_interview", "complete_matrix"};
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw std::invalid_argument("unknown exploration setting '" + k + "'");
  ExplorationConfig c;
  c.n_candidate = j.value("n_candidate", c.n_candidate);
  c.n_pos = j.value("n_pos", c.n_pos);
  c.n_neg = j.value("n_neg", c.n_neg);
  c.n_model = j.value("n_model", c.n_model);
  c.n_selection = j.value("n_selection", c.n_selection);
  c.n_iter_in = j.value("n_iter_in", c.n_iter_in);
  c.a_thre = j.value("a_thre", c.a_thre);
  c.r_thre = j.value("r_thre", c.r_thre);
  c.max_clusters = j.value("max_clusters", c.max_clusters);
  c.use_interview = j.value("use_interview", c.use_interview);
  c.complete_matrix = j.value("complete_matrix", c.complete_matrix);
  c.validate();
  return c;
}

ScreenResult screen_candidate(const std::vector<double>& applicability, const std::vector<bool>& missing,
                              const std::vector<double>& y_true, double a_thre, double r_thre) {
  if (applicability.size() != y_true.size() || missing.size() != y_true.size())
    throw std::invalid_argument("screen_candidate: length mismatch");
  std::vector<double> a, y;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (missing[i]) continue;
    a.push_back(applicability[i]);
    y.push_back(y_true[i]);
  }
  ScreenResult r;
  r.n_used = a.size();
  r.n_missing = y_true.size() - a.size();
  if (!a.empty()) r.mean_applicability = ml::mean(a);
  if (a.size() >= 2) {
    const auto c = ml::pearson(a, y);
    r.correlation = c.r;
    r.zero_variance = c.zero_variance;
  } else {
    r.zero_variance = true;
  }
  if (r.mean_applicability < a_thre) r.reason = RejectReason::LowApplicability;
  else if (std::abs(r.correlation) < r_thre) r.reason = RejectReason::LowCorrelation;
  r.accepted = !r.reason;
  return r;
}

ml::DesignMatrix applicability_design(const ApplicabilityMatrix& matrix, const std::vector<std::string>& features,
                                      const std::vector<std::string>& ids, std::vector<double> y) {
  std::vector<std::vector<double>> cols;
  for (const auto& f : features) cols.push_back(matrix.row(f, ids));
  std::vector<double> values;
  values.reserve(ids.size() * features.size());
  for (std::size_t r = 0; r < ids.size(); ++r)
    for (const auto& c : cols) values.push_back(c[r]);
  return ml::DesignMatrix(features, std::move(values), std::move(y), ids);
}

std::vector<int> cluster_features(const ApplicabilityMatrix& matrix, const std::vector<std::string>& features,
                                  const std::vector<std::string>& ids, std::size_t max_clusters) {
  if (features.empty()) return {};
  std::vector<std::vector<double>> vectors;
  for (const auto& f : features) vectors.push_back(matrix.row(f, ids));
  return ml::agglomerate(ml::correlation_distance(vectors), max_clusters).assignment;
}

std::vector<std::string> select_model_features(const std::vector<int>& assignment,
                                               const std::vector<std::string>& features, std::size_t n_selection,
                                               Rng& rng) {
  if (assignment.size() != features.size()) throw std::invalid_argument("select_model_features: length mismatch");
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < features.size(); ++i) members[assignment[i]].push_back(i);
  std::vector<int> clusters;
  for (const auto& [c, _] : members) clusters.push_back(c);
  rng.shuffle(clusters);
  if (clusters.size() > n_selection) clusters.resize(n_selection);
  std::vector<std::size_t> chosen;
  for (int c : clusters) {
    const auto& m = members[c];
    chosen.push_back(m[rng.below(m.size())]);
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<std::string> out;
  for (auto i : chosen) out.push_back(features[i]);
  return out;
}

RankedErrors rank_error_samples(const std::vector<std::string>& ids, const std::vector<double>& y_true,
                                const std::vector<double>& y_pred, std::size_t n_pos, std::size_t n_neg) {
  if (ids.size() != y_true.size() || ids.size() != y_pred.size())
    throw std::invalid_argument("rank_error_samples: length mismatch");
  RankedErrors out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    ErrorSample s{ids[i], y_true[i], y_pred[i], y_true[i] - y_pred[i]};
    if (s.error > 0) out.positive.push_back(s);
    else if (s.error < 0) out.negative.push_back(s);
  }
  std::stable_sort(out.positive.begin(), out.positive.end(),
                   [](const ErrorSample& a, const ErrorSample& b) { return a.error > b.error; });
  std::stable_sort(out.negative.begin(), out.negative.end(),
                   [](const ErrorSample& a, const ErrorSample& b) { return a.error < b.error; });
  if (out.positive.size() > n_pos) out.positive.resize(n_pos);
  if (out.negative.size() > n_neg) out.negative.resize(n_neg);
  return out;
}

llm::ChatRequest proposal_request(const ProposalContext& ctx, const std::vector<llm::ImagePayload>& images) {
  llm::ChatRequest req;
  req.role = llm::Role::FeatureGenerator;
  req.system_prompt =
      "You help model one person's aesthetic ratings of images (1 to 5). Features are short linguistic "
      "descriptions of image properties; another model scores how well each feature applies to each image, "
      "and a regression on those scores predicts the rating. Propose new features that would explain the "
      "ratings of the images shown.";
  std::ostringstream u;
  if (!ctx.interview_digest.empty()) u << "Interview notes about this person:\n" << ctx.interview_digest << "\n\n";
  if (ctx.cold_start) {
    u << (ctx.tail == Tail::Positive ? "Images this person rated highest:\n" : "Images this person rated lowest:\n");
    for (const auto& s : ctx.samples) u << fmt::format("- Image ID: {} | rating {:.1f}\n", s.image_id, s.y_true);
  } else {
    u << (ctx.tail == Tail::Positive ? "Images whose rating the current model under-predicts (error = rating - prediction):\n"
                                     : "Images whose rating the current model over-predicts (error = rating - prediction):\n");
    for (const auto& s : ctx.samples) {
      u << fmt::format("- Image ID: {} | rating {:.1f} | error {:+.3f}", s.image_id, s.y_true, s.error);
      if (ctx.matrix && !ctx.model_features.empty()) {
        u << " | applicability:";
        for (const auto& f : ctx.model_features)
          u << fmt::format(" `{}`={:.2f}", f.name, ctx.matrix->value(f.name, s.image_id));
      }
      u << "\n";
    }
    u << "\nCurrent model features with coefficients:\n";
    for (std::size_t i = 0; i < ctx.model_features.size(); ++i)
      u << fmt::format("- `{}` ({:+.4f}): {}\n", ctx.model_features[i].name,
                       i < ctx.coefficients.size() ? ctx.coefficients[i] : 0.0, ctx.model_features[i].description);
    u << fmt::format("Intercept: {:.4f}\n", ctx.intercept);
  }
  u << "\nAccepted features:\n";
  if (ctx.accepted.empty()) u << "(none)\n";
  for (const auto& f : ctx.accepted) u << fmt::format("- `{}`: {}\n", f.name, f.description);
  u << "\nRejected features:\n";
  if (ctx.rejected.empty()) u << "(none)\n";
  for (const auto& r : ctx.rejected)
    u << fmt::format("- `{}` ({}): {}\n", r.feature.name, r.screen.reason ? to_string(*r.screen.reason) : "rejected",
                     r.feature.description);
  if (!ctx.pending.empty()) {
    u << "\nAlready proposed in this round:\n";
    for (const auto& f : ctx.pending) u << fmt::format("- `{}`: {}\n", f.name, f.description);
  }
  u << fmt::format(
      "\nPropose up to {} new features not listed above. Reply with one fenced block, one entry per feature:\n"
      "```\nname: short_identifier\ndescription: one sentence describing the image property\n```",
      ctx.n_candidate);
  req.messages.push_back({"user", u.str()});
  req.images = images;
  return req;
}

std::vector<Feature> ExplorationState::accepted_features() const {
  std::vector<Feature> out;
  for (const auto& r : accepted) out.push_back(r.feature);
  return out;
}

void ExplorationState::check_invariants() const {
  std::set<std::string> seen;
  for (const auto* pool : {&accepted, &rejected})
    for (const auto& r : *pool) {
      if (r.feature.description.empty()) throw std::logic_error("feature '" + r.feature.name + "' has no description");
      if (!seen.insert(name_key(r.feature.name)).second)
        throw std::logic_error("feature name '" + r.feature.name + "' appears twice");
    }
  for (const auto& r : accepted)
    if (!r.screen.accepted) throw std::logic_error("accepted pool holds rejected feature '" + r.feature.name + "'");
  for (const auto& r : rejected)
    if (r.screen.accepted) throw std::logic_error("rejected pool holds accepted feature '" + r.feature.name + "'");
}

namespace {

std::vector<const ImageRecord*> records(const Dataset& d, const std::vector<std::string>& ids) {
  std::vector<const ImageRecord*> out;
  for (const auto& id : ids) out.push_back(&d.image(id));
  return out;
}

std::vector<ErrorSample> extremes(const std::vector<std::string>& ids, const std::vector<double>& y, std::size_t n,
                                  bool highest) {
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return highest ? y[a] > y[b] : y[a] < y[b]; });
  std::vector<ErrorSample> out;
  for (std::size_t k = 0; k < std::min(n, order.size()); ++k)
    out.push_back({ids[order[k]], y[order[k]], y[order[k]], 0.0});
  return out;
}

}  // namespace

ExplorationState run_exploration(const Dataset& dataset, const DatasetSplit& split, const std::string& interview_digest,
                                 const ExplorationConfig& config, llm::Gateway& gateway,
                                 ApplicabilityEvaluator& evaluator, std::uint64_t seed, ExplorationTrace* trace,
                                 const ExplorationHooks& hooks) {
  config.validate();
  if (split.train_ids.size() < 2) throw std::invalid_argument("exploration needs at least two training images");
  ExplorationState st;
  st.seed = seed;
  const auto& train_ids = split.train_ids;
  const auto y_train = dataset.ratings_for(train_ids);
  const auto train_images = records(dataset, train_ids);
  const std::string digest = config.use_interview ? interview_digest : std::string();

  for (int it = 1; it <= config.n_iter_in; ++it) {
    IterationTrace tr;
    tr.iteration = it;
    const auto inner = split_inner(train_ids, derive_seed(seed, {1, static_cast<std::uint64_t>(it)}));
    tr.inner_train_ids = inner.train_ids;
    tr.inner_val_ids = inner.val_ids;
    const auto y_in = dataset.ratings_for(inner.train_ids);
    const auto y_val = dataset.ratings_for(inner.val_ids);
    const auto accepted = st.accepted_features();
    tr.cold_start = accepted.empty();

    std::set<std::string> taken;
    for (const auto* pool : {&st.accepted, &st.rejected})
      for (const auto& r : *pool) taken.insert(name_key(r.feature.name));
    std::vector<Feature> pending;

    auto propose = [&](ProposalContext ctx) {
      ctx.accepted = accepted;
      ctx.rejected = st.rejected;
      ctx.pending = pending;
      ctx.interview_digest = digest;
      ctx.n_candidate = config.n_candidate;
      ctx.matrix = &st.matrix;
      std::vector<llm::ImagePayload> images;
      CallRecord rec;
      rec.tail = ctx.tail;
      for (const auto& s : ctx.samples) {
        rec.image_ids.push_back(s.image_id);
        if (evaluator.payloads())
          for (auto& p : evaluator.payloads()(dataset.image(s.image_id))) images.push_back(std::move(p));
      }
      std::vector<FeatureCandidate> parsed;
      try {
        parsed = parse_candidates(gateway.complete_with_fallback(proposal_request(ctx, images)).text);
      } catch (const llm::ConfigError&) {
        throw;
      } catch (const llm::LlmError&) {
        rec.failed = true;
      }
      rec.parsed = parsed.size();
      auto kept = filter_candidates(std::move(parsed), taken, static_cast<std::size_t>(config.n_candidate));
      rec.kept = kept.size();
      for (auto& c : kept) {
        taken.insert(name_key(c.name));
        pending.push_back({std::move(c.name), std::move(c.description),
                           {tr.cold_start ? OriginKind::ColdStart : OriginKind::ErrorDriven, it}});
      }
      tr.calls.push_back(std::move(rec));
    };

    if (tr.cold_start) {
      ProposalContext pos;
      pos.tail = Tail::Positive;
      pos.cold_start = true;
      pos.samples = extremes(inner.val_ids, y_val, config.n_pos, true);
      propose(pos);
      ProposalContext neg;
      neg.tail = Tail::Negative;
      neg.cold_start = true;
      neg.samples = extremes(inner.val_ids, y_val, config.n_neg, false);
      propose(neg);
    } else {
      std::vector<std::string> names;
      for (const auto& f : accepted) names.push_back(f.name);
      tr.clusters = cluster_features(st.matrix, names, inner.train_ids, static_cast<std::size_t>(config.max_clusters));
      for (int m = 0; m < config.n_model; ++m) {
        Rng rng(derive_seed(seed, {2, static_cast<std::uint64_t>(it), static_cast<std::uint64_t>(m)}));
        const auto sel = select_model_features(tr.clusters, names, static_cast<std::size_t>(config.n_selection), rng);
        const auto model = ml::fit_ols(applicability_design(st.matrix, sel, inner.train_ids, y_in));
        const auto pred = model.predict(applicability_design(st.matrix, sel, inner.val_ids, y_val));
        const auto ranked = rank_error_samples(inner.val_ids, y_val, pred, static_cast<std::size_t>(config.n_pos),
                                               static_cast<std::size_t>(config.n_neg));
        std::vector<Feature> model_features;
        for (const auto& name : sel)
          for (const auto& f : accepted)
            if (f.name == name) model_features.push_back(f);
        for (Tail tail : {Tail::Positive, Tail::Negative}) {
          const auto& samples = tail == Tail::Positive ? ranked.positive : ranked.negative;
          if (samples.empty()) continue;
          ProposalContext ctx;
          ctx.tail = tail;
          ctx.samples = samples;
          ctx.model_features = model_features;
          ctx.coefficients = model.linear().coefficients;
          ctx.intercept = model.linear().intercept;
          propose(ctx);
        }
        tr.models.push_back(model);
      }
    }

    evaluator.evaluate_all(pending, train_images, st.matrix);
    for (const auto& f : pending) {
      FeatureRecord rec{f, screen_candidate(st.matrix.row(f.name, train_ids), st.matrix.missing_mask(f.name, train_ids),
                                            y_train, config.a_thre, config.r_thre)};
      if (rec.screen.accepted) {
        tr.newly_accepted.push_back(f.name);
        st.accepted.push_back(std::move(rec));
      } else {
        tr.newly_rejected.push_back(f.name);
        st.rejected.push_back(std::move(rec));
      }
    }
    st.iteration = it;
    st.check_invariants();
    if (hooks.on_iteration) hooks.on_iteration(st, tr);
    if (trace) trace->iterations.push_back(std::move(tr));
  }

  if (config.complete_matrix) evaluator.evaluate_all(st.accepted_features(), records(dataset, dataset.ids()), st.matrix);
  return st;
}

std::vector<std::string> verify_screening(const ExplorationState& state, const Dataset& dataset,
                                          const DatasetSplit& split, const ExplorationConfig& config) {
  std::vector<std::string> problems;
  const auto y = dataset.ratings_for(split.train_ids);
  for (const auto* pool : {&state.accepted, &state.rejected})
    for (const auto& r : *pool) {
      const auto& name = r.feature.name;
      try {
        const auto again = screen_candidate(state.matrix.row(name, split.train_ids),
                                            state.matrix.missing_mask(name, split.train_ids), y, config.a_thre,
                                            config.r_thre);
        if (!(again == r.screen)) problems.push_back("screening of '" + name + "' does not reproduce");
        if (r.screen.accepted && (again.mean_applicability < config.a_thre || std::abs(again.correlation) < config.r_thre))
          problems.push_back("accepted feature '" + name + "' misses a threshold");
      } catch (const std::out_of_range& e) {
        problems.push_back(e.what());
      }
    }
  return problems;
}

}  // namespace preflab::features
