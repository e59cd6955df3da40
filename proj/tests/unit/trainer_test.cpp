#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "oracles.hpp"
#include "preflab/ml/regressors.hpp"
#include "preflab/ml/stats.hpp"
#include "preflab/trainer/design.hpp"
#include "preflab/trainer/forward.hpp"
#include "preflab/trainer/screening.hpp"
#include "preflab/trainer/search.hpp"
#include "preflab/trainer/system.hpp"
#include "test_fixtures.hpp"

using namespace preflab;
using namespace preflab::trainer;
using features::ApplicabilityMatrix;

namespace {

double grid_value(double v) { return std::clamp(std::round(v * 4.0) / 4.0, 0.0, 1.0); }

// Dataset whose ratings follow two latent features; `noise` features are
// random and `copies` near-duplicates of the first latent one.
struct Synthetic {
  Dataset dataset;
  DatasetSplit split;
  features::ExplorationState state;
  std::map<std::string, double> dl;

  static Synthetic make(std::size_t n, std::uint64_t seed, int noise = 3, int copies = 0) {
    Synthetic s;
    Rng rng(seed);
    std::vector<ImageRecord> images;
    std::vector<RatingSample> ratings;
    std::map<std::string, std::vector<double>> cols;
    for (std::size_t i = 0; i < n; ++i) {
      const auto id = testing::image_id(i);
      images.push_back({id, static_cast<Category>(i % 5), RatingClass::Middle, ""});
      const double a = 0.25 * static_cast<double>(rng.below(5));
      const double b = 0.25 * static_cast<double>(rng.below(5));
      const double latent = rng.normal();
      cols["alpha"].push_back(a);
      cols["beta"].push_back(b);
      for (int k = 0; k < copies; ++k)
        cols["alpha_copy" + std::to_string(k)].push_back(grid_value(a + 0.25 * (rng.uniform() < 0.2 ? 1 : 0)));
      for (int k = 0; k < noise; ++k) cols["noise" + std::to_string(k)].push_back(0.25 * static_cast<double>(rng.below(5)));
      double r = 3.0 + 1.6 * (a - 0.5) + 1.0 * (b - 0.5) + 0.5 * latent + 0.15 * rng.normal();
      r = std::clamp(std::round(r * 2.0) / 2.0, 1.0, 5.0);
      ratings.push_back({id, r});
      s.dl[id] = 3.0 + 0.5 * latent + 0.1 * rng.normal();
    }
    s.dataset = Dataset(images, ratings);
    SplitOptions o;
    o.n_test = n / 6;
    s.split = split_dataset(s.dataset, o, seed);
    for (const auto& [name, v] : cols) {
      for (std::size_t i = 0; i < n; ++i) s.state.matrix.set(name, images[i].image_id, v[i]);
      features::FeatureRecord rec{{name, "description of " + name, {}}, {}};
      rec.screen.accepted = true;
      s.state.accepted.push_back(rec);
    }
    return s;
  }
};

std::vector<std::string> names_of(const features::ExplorationState& st) {
  std::vector<std::string> out;
  for (const auto& r : st.accepted) out.push_back(r.feature.name);
  return out;
}

}  // namespace

TEST_SUITE("design") {
  TEST_CASE("DL column is appended, missing ids are named") {
    ApplicabilityMatrix m;
    std::vector<std::string> ids, feats;
    std::map<std::string, double> dl;
    for (int f = 0; f < 12; ++f) feats.push_back("f" + std::to_string(f));
    for (int i = 0; i < 255; ++i) {
      ids.push_back(testing::image_id(i));
      dl[ids.back()] = 3.0;
      for (const auto& f : feats) m.set(f, ids.back(), 0.5);
    }
    std::vector<double> y(255, 3.0);
    auto X = build_design(m, feats, ids, y, &dl);
    CHECK(X.rows() == 255);
    CHECK(X.cols() == 13);
    CHECK(X.columns().back() == kDlColumn);
    CHECK(build_design(m, feats, ids, y, nullptr).cols() == 12);

    dl.erase("img_100");
    try {
      build_design(m, feats, ids, y, &dl);
      FAIL("expected a DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("img_100") != std::string::npos);
    }
  }

  TEST_CASE("missing cells enter the design as zero") {
    ApplicabilityMatrix m;
    m.set("f", "a", 1.0);
    m.set_missing("f", "b");
    auto X = build_design(m, {"f"}, {"a", "b"}, {1, 2}, nullptr);
    CHECK(X.at(0, 0) == 1.0);
    CHECK(X.at(1, 0) == 0.0);
  }
}

TEST_SUITE("screen_features") {
  TEST_CASE("one tight cluster of 7 keeps 3, two features keep both") {
    auto s = Synthetic::make(120, 1, 0, 6);
    // alpha and its six copies form one cluster once beta is left out
    std::vector<std::string> alpha_family{"alpha"};
    for (int k = 0; k < 6; ++k) alpha_family.push_back("alpha_copy" + std::to_string(k));
    const auto y = s.dataset.ratings_for(s.split.train_ids);
    auto sc = screen_features(s.state.matrix, alpha_family, s.split.train_ids, y, 3, 1);
    CHECK(sc.clusters.size() == 1);
    CHECK(sc.features.size() == 3);

    auto two = screen_features(s.state.matrix, {"alpha", "beta"}, s.split.train_ids, y, 3, 20);
    CHECK(two.features.size() == 2);
    CHECK(screen_features(s.state.matrix, {}, s.split.train_ids, y, 3, 20).features.empty());
  }

  TEST_CASE("survivors are the per-cluster |corr| top-k") {
    Rng rng(4);
    for (int trial = 0; trial < 30; ++trial) {
      ApplicabilityMatrix m;
      std::vector<std::string> ids, names;
      std::vector<double> y;
      const std::size_t n = 30, p = 4 + rng.below(10);
      for (std::size_t i = 0; i < n; ++i) {
        ids.push_back("i" + std::to_string(i));
        y.push_back(1.0 + 0.5 * static_cast<double>(rng.below(9)));
      }
      for (std::size_t f = 0; f < p; ++f) {
        names.push_back("f" + std::to_string(f));
        for (std::size_t i = 0; i < n; ++i) m.set(names.back(), ids[i], 0.25 * static_cast<double>(rng.below(5)));
      }
      const std::size_t k = 1 + rng.below(3), maxc = 1 + rng.below(5);
      const auto sc = screen_features(m, names, ids, y, k, maxc);
      const auto assignment = features::cluster_features(m, names, ids, maxc);
      std::map<int, std::vector<std::pair<double, std::size_t>>> oracle;
      for (std::size_t f = 0; f < p; ++f)
        oracle[assignment[f]].push_back({-std::abs(ml::pearson(m.row(names[f], ids), y).r), f});
      std::vector<std::string> want;
      for (auto& [c, v] : oracle) {
        std::sort(v.begin(), v.end());
        for (std::size_t j = 0; j < std::min(k, v.size()); ++j) want.push_back(names[v[j].second]);
      }
      CHECK(sc.features == want);
      for (const auto& [c, members] : sc.clusters) CHECK(members.size() <= k);
    }
  }
}

TEST_SUITE("grid") {
  TEST_CASE("default ranges and canonical order") {
    GridRanges g;
    const auto gbr = g.points(ml::ModelKind::Gbr);
    CHECK(gbr.size() == 108);
    CHECK(std::get<ml::GbrParams>(gbr.front()) == ml::GbrParams{100, 0.05, 2, 1, 0.8});
    CHECK(std::get<ml::GbrParams>(gbr[1]) == ml::GbrParams{100, 0.05, 2, 1, 1.0});
    CHECK(std::get<ml::GbrParams>(gbr[2]) == ml::GbrParams{100, 0.05, 2, 3, 0.8});
    CHECK(std::get<ml::GbrParams>(gbr.back()) == ml::GbrParams{500, 0.1, 4, 5, 1.0});
    const auto ridge = g.points(ml::ModelKind::Ridge);
    REQUIRE(ridge.size() == 4);
    CHECK(std::get<ml::RidgeParams>(ridge[0]).alpha == 0.5);
    CHECK(std::get<ml::RidgeParams>(ridge[3]).alpha == 4.0);
    const auto rfr = g.points(ml::ModelKind::Rfr);
    CHECK(rfr.size() == 72);
    const auto& r0 = std::get<ml::RfrParams>(rfr[0]);
    CHECK(r0.n_estimators == 200);
    CHECK_FALSE(r0.max_depth.has_value());
    CHECK(r0.max_features == ml::MaxFeatures::sqrt());
    CHECK(g.points(ml::ModelKind::Ols).size() == 1);
  }

  TEST_CASE("json overrides and validation") {
    GridRanges g;
    g.apply_json(ml::ModelKind::Gbr, {{"n_estimators", {20}}, {"max_depth", {2}}});
    CHECK(g.points(ml::ModelKind::Gbr).size() == 1 * 2 * 1 * 3 * 2);
    g.apply_json(ml::ModelKind::Rfr, {{"max_depth", {nullptr, 3}}, {"max_features", {"sqrt", 0.5}}});
    CHECK(g.points(ml::ModelKind::Rfr).size() == 2 * 2 * 3 * 2);
    CHECK_THROWS_AS(g.apply_json(ml::ModelKind::Ridge, {{"depth", {1}}}), std::invalid_argument);
    CHECK_THROWS_AS(g.apply_json(ml::ModelKind::Ridge, {{"alpha", nlohmann::json::array()}}), std::invalid_argument);
    GridRanges back;
    back.apply_json(ml::ModelKind::Rfr, g.to_json(ml::ModelKind::Rfr));
    CHECK(back.points(ml::ModelKind::Rfr) == g.points(ml::ModelKind::Rfr));
  }

  TEST_CASE("labels") {
    for (auto l : {"FS-LR", "FS-RR", "HPS-RR", "HPS-RFR", "HPS-GBR", "FS-LR-withDL", "FS-RR-withDL", "HPS-RR-withDL",
                   "HPS-RFR-withDL", "HPS-GBR-withDL"})
      CHECK(config_from_label(l).label() == l);
    CHECK_THROWS_AS(config_from_label("FS-GBR"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_label("XYZ"), std::invalid_argument);
    TrainingConfig c;
    CHECK(c.label() == "HPS-GBR-withDL");
    CHECK(c.l_thre == 0.001);
    CHECK(c.n_iter_out == 10);
    CHECK(c.n_screened == 3);
    CHECK(TrainingConfig::from_json(c.to_json()).to_json() == c.to_json());
    CHECK_THROWS_AS(TrainingConfig::from_json({{"mode", "fs"}, {"family", "rfr"}}), std::invalid_argument);
    CHECK_THROWS_AS(TrainingConfig::from_json({{"l_thre", -1.0}}), std::invalid_argument);
  }
}

TEST_SUITE("hyperparameter_search") {
  TEST_CASE("argmin over a 3-point grid matches direct re-evaluation") {
    auto s = Synthetic::make(150, 2);
    const auto names = names_of(s.state);
    const auto tr = build_design(s.state.matrix, names, s.split.train_ids, s.dataset.ratings_for(s.split.train_ids), &s.dl);
    const auto va = build_design(s.state.matrix, names, s.split.val_ids, s.dataset.ratings_for(s.split.val_ids), &s.dl);
    std::vector<ml::Hyperparameters> grid{ml::GbrParams{30, 0.1, 2, 1, 1.0}, ml::GbrParams{30, 0.1, 3, 5, 0.8},
                                          ml::GbrParams{60, 0.05, 1, 3, 1.0}};
    const auto res = hyperparameter_search(tr, va, ml::ModelKind::Gbr, grid, 9, 3);
    std::size_t best = 0;
    double best_loss = INFINITY;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto m = ml::fit_gbr(tr, std::get<ml::GbrParams>(grid[i]), 9);
      double loss = 0;
      const auto p = m.predict(va);
      for (std::size_t r = 0; r < p.size(); ++r) loss += std::abs(p[r] - va.target()[r]);
      loss /= static_cast<double>(p.size());
      CHECK(res.evaluations[i].val_mae == doctest::Approx(loss).epsilon(1e-12));
      if (loss < best_loss) best_loss = loss, best = i;
    }
    CHECK(res.best_index == best);
    CHECK(res.model == ml::fit_gbr(tr, std::get<ml::GbrParams>(grid[best]), 9));
    for (const auto& e : res.evaluations) CHECK(res.val_mae <= e.val_mae);
    // worker count does not change the outcome
    CHECK(hyperparameter_search(tr, va, ml::ModelKind::Gbr, grid, 9, 1).model == res.model);
  }

  TEST_CASE("ties go to the first grid point") {
    auto s = Synthetic::make(60, 3);
    const auto names = names_of(s.state);
    const auto tr = build_design(s.state.matrix, names, s.split.train_ids, s.dataset.ratings_for(s.split.train_ids), nullptr);
    const auto va = build_design(s.state.matrix, names, s.split.val_ids, s.dataset.ratings_for(s.split.val_ids), nullptr);
    std::vector<ml::Hyperparameters> grid{ml::RidgeParams{2.0}, ml::RidgeParams{2.0}, ml::RidgeParams{2.0}};
    CHECK(hyperparameter_search(tr, va, ml::ModelKind::Ridge, grid, 0, 2).best_index == 0);
  }

  TEST_CASE("zero columns is a degenerate input") {
    ml::DesignMatrix empty({}, {}, {1.0, 2.0}, {"a", "b"});
    CHECK_THROWS_AS(hyperparameter_search(empty, empty, ml::ModelKind::Ridge, {ml::RidgeParams{}}, 0),
                    DegenerateInputError);
  }
}

TEST_SUITE("forward_selection") {
  // one predictive feature among noise, each in its own cluster
  struct OneSignal {
    ml::DesignMatrix train, val;
    ScreenedFeatureSet screened;
  };
  OneSignal one_signal(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n_tr = 80, n_val = 30, p = 6;
    std::vector<std::string> cols;
    for (std::size_t f = 0; f < p; ++f) cols.push_back("x" + std::to_string(f));
    auto make = [&](std::size_t n) {
      std::vector<double> v, y;
      std::vector<std::string> ids;
      for (std::size_t i = 0; i < n; ++i) {
        double target = 0;
        for (std::size_t f = 0; f < p; ++f) {
          const double x = 0.25 * static_cast<double>(rng.below(5));
          v.push_back(x);
          if (f == 3) target = 1.0 + 3.0 * x + 0.1 * rng.normal();
        }
        y.push_back(target);
        ids.push_back("r" + std::to_string(i));
      }
      return ml::DesignMatrix(cols, v, y, ids);
    };
    OneSignal s{make(n_tr), make(n_val), {}};
    for (std::size_t f = 0; f < p; ++f) {
      s.screened.clusters[static_cast<int>(f)] = {cols[f]};
      s.screened.features.push_back(cols[f]);
    }
    return s;
  }

  double ols_val_mae(const OneSignal& s, const std::vector<std::string>& cols) {
    const auto m = ml::fit_ols(s.train.select_columns(cols));
    return mae(s.val.target(), m.predict(s.val.select_columns(cols)));
  }

  TEST_CASE("the predictive feature goes first; steps match exhaustive subsets") {
    auto s = one_signal(5);
    ForwardOptions o;
    o.l_thre = 0.0;
    o.n_iter_out = 2;
    const auto res = forward_selection(s.train, s.val, s.screened, o);
    REQUIRE(res.selected.size() >= 1);
    CHECK(res.selected[0] == "x3");
    // size-1 oracle
    std::string best1;
    double l1 = INFINITY;
    for (const auto& f : s.screened.features) {
      const double l = ols_val_mae(s, {f});
      if (l < l1) l1 = l, best1 = f;
    }
    CHECK(best1 == res.selected[0]);
    CHECK(res.steps[0].val_mae == doctest::Approx(l1).epsilon(1e-12));
    // size-2 oracle over pairs containing the first choice
    std::string best2;
    double l2 = INFINITY;
    for (const auto& f : s.screened.features) {
      if (f == best1) continue;
      const double l = ols_val_mae(s, {best1, f});
      if (l < l2) l2 = l, best2 = f;
    }
    if (l2 < l1) {
      REQUIRE(res.selected.size() == 2);
      CHECK(res.selected[1] == best2);
    } else {
      CHECK(res.selected.size() == 1);
    }
  }

  TEST_CASE("improvement below l_thre stops the search") {
    auto s = one_signal(6);
    ForwardOptions o;
    o.l_thre = 0.0;
    const auto full = forward_selection(s.train, s.val, s.screened, o);
    REQUIRE(full.steps.size() >= 2);
    const double gain = full.steps[0].val_mae - full.steps[1].val_mae;
    o.l_thre = gain * 2.0;
    const auto stopped = forward_selection(s.train, s.val, s.screened, o);
    CHECK(stopped.selected.size() == 1);
    REQUIRE(stopped.rejected_step.has_value());
    CHECK(stopped.rejected_step->feature == full.selected[1]);
    o.l_thre = gain * 0.5;
    CHECK(forward_selection(s.train, s.val, s.screened, o).selected.size() >= 2);
  }

  TEST_CASE("selected features never share a cluster and MAE drops by more than l_thre") {
    auto syn = Synthetic::make(200, 7, 4, 3);
    const auto y_tr = syn.dataset.ratings_for(syn.split.train_ids);
    const auto sc = screen_features(syn.state.matrix, names_of(syn.state), syn.split.train_ids, y_tr, 3, 4);
    const auto tr = build_design(syn.state.matrix, sc.features, syn.split.train_ids, y_tr, nullptr);
    const auto va = build_design(syn.state.matrix, sc.features, syn.split.val_ids, syn.dataset.ratings_for(syn.split.val_ids), nullptr);
    for (auto kind : {ml::ModelKind::Ols, ml::ModelKind::Ridge}) {
      ForwardOptions o;
      o.kind = kind;
      const auto res = forward_selection(tr, va, sc, o);
      std::set<int> used;
      for (const auto& st : res.steps) CHECK(used.insert(st.cluster).second);
      CHECK(res.selected.size() <= std::min<std::size_t>(10, sc.clusters.size()));
      for (std::size_t i = 1; i < res.steps.size(); ++i) CHECK(res.steps[i].val_mae < res.steps[i - 1].val_mae - o.l_thre);
      REQUIRE(res.model.has_value());
      CHECK(res.model->kind() == kind);
    }
    ForwardOptions bad;
    bad.kind = ml::ModelKind::Gbr;
    CHECK_THROWS_AS(forward_selection(tr, va, sc, bad), std::invalid_argument);
  }
}

TEST_SUITE("prediction system") {
  TEST_CASE("HPS and FS systems train deterministically and beat the mean") {
    auto s = Synthetic::make(180, 11);
    for (auto label : {"HPS-RR", "FS-LR-withDL", "FS-RR", "HPS-GBR-withDL", "HPS-RFR"}) {
      auto cfg = config_from_label(label);
      cfg.grid.apply_json(ml::ModelKind::Gbr, {{"n_estimators", {50}}, {"max_depth", {2, 3}}, {"min_samples_leaf", {3}}});
      cfg.grid.apply_json(ml::ModelKind::Rfr, {{"n_estimators", {30}}, {"max_depth", {4}}, {"min_samples_leaf", {2}}});
      const auto a = train_system(s.state, s.dataset, s.split, &s.dl, cfg, 3);
      const auto b = train_system(s.state, s.dataset, s.split, &s.dl, cfg, 3);
      CHECK(a.model == b.model);
      CHECK(a.report == b.report);
      CHECK(a.label == label);
      const auto y_val = s.dataset.ratings_for(s.split.val_ids);
      const double m = ml::mean(s.dataset.ratings_for(s.split.train_ids));
      CHECK(a.val_mae < mae(y_val, std::vector<double>(y_val.size(), m)));
      // the feature list covers exactly the model's non-DL predictors
      std::vector<std::string> want;
      for (const auto& n : a.model.feature_names())
        if (n != kDlColumn) want.push_back(n);
      std::vector<std::string> have;
      for (const auto& f : a.features) have.push_back(f.name);
      CHECK(have == want);
      const bool has_dl = std::count(a.model.feature_names().begin(), a.model.feature_names().end(), kDlColumn) == 1;
      CHECK(has_dl == a.with_dl);
    }
  }

  TEST_CASE("no accepted features: DL calibration or constant") {
    auto s = Synthetic::make(240, 12);
    features::ExplorationState empty;
    auto cfg = config_from_label("HPS-GBR-withDL");
    const auto sys = train_system(empty, s.dataset, s.split, &s.dl, cfg, 1);
    CHECK(sys.model.feature_names() == std::vector<std::string>{kDlColumn});
    std::vector<double> raw;
    for (const auto& id : s.split.val_ids) raw.push_back(s.dl.at(id));
    CHECK(sys.val_mae <= mae(s.dataset.ratings_for(s.split.val_ids), raw) + 0.05);
    CHECK(sys.report["n_accepted"] == 0);

    const auto flat = train_system(empty, s.dataset, s.split, nullptr, config_from_label("FS-LR"), 1);
    CHECK(flat.model.feature_names().empty());
    CHECK(flat.model.linear().intercept == doctest::Approx(ml::mean(s.dataset.ratings_for(s.split.train_ids))));
    CHECK_THROWS_AS(train_system(empty, s.dataset, s.split, nullptr, cfg, 1), std::invalid_argument);
  }

  TEST_CASE("pure intercept predicts the intercept") {
    ml::FittedModel m(ml::ModelKind::Ols, {"f"}, std::monostate{}, ml::LinearParams{2.75, {0.8}, false});
    PredictionSystem sys{"FS-LR", m, {{"f", "d", {}}}, false, 0, 0, config_from_label("FS-LR"), {}, {}};
    sys.matrix.set("f", "img", 0.0);
    ImageRecord img{"img", Category::Scene, RatingClass::Low, ""};
    CHECK(predict(sys, img, std::nullopt, nullptr).score == 2.75);
    auto d = predict(sys, img, std::nullopt, nullptr, true);
    REQUIRE(d.discrete.has_value());
    CHECK(d.discrete->value() == 3.0);
    ImageRecord other{"other", Category::Scene, RatingClass::Low, ""};
    CHECK_THROWS_AS(predict(sys, other, std::nullopt, nullptr), std::invalid_argument);
  }

  TEST_CASE("cached rows avoid the gateway; uncached ones use it") {
    ml::FittedModel m(ml::ModelKind::Ols, {"f", kDlColumn}, std::monostate{}, ml::LinearParams{1.0, {2.0, 0.5}, false});
    PredictionSystem sys{"FS-LR-withDL", m, {{"f", "d", {}}}, true, 0, 0, config_from_label("FS-LR-withDL"), {}, {}};
    sys.matrix.set("f", "cached", 0.75);
    auto mock = std::make_shared<llm::MockProvider>(std::vector<llm::ScriptRule>{{"Image ID: fresh", "1"}});
    llm::Gateway g(llm::uniform_role_table("mock", "mock"));
    g.register_provider(mock);
    features::ApplicabilityEvaluator ev(g, {});
    ImageRecord cached{"cached", Category::Scene, RatingClass::Low, ""}, fresh{"fresh", Category::Scene, RatingClass::Low, ""};
    auto p = predict(sys, cached, 3.0, &ev);
    CHECK(p.score == doctest::Approx(1.0 + 1.5 + 1.5));
    CHECK(mock->calls() == 0);
    CHECK(p.llm_calls == 0);
    p = predict(sys, fresh, 3.0, &ev);
    CHECK(mock->calls() == 1);
    CHECK(p.score == doctest::Approx(1.0 + 0.5 + 1.5));
    CHECK_THROWS_AS(predict(sys, cached, std::nullopt, &ev), std::invalid_argument);
  }

  TEST_CASE("bundle round trip and hand evaluation of the serialized model") {
    auto s = Synthetic::make(150, 13);
    const auto cfg = config_from_label("HPS-RR-withDL");
    const auto sys = train_system(s.state, s.dataset, s.split, &s.dl, cfg, 4);
    const auto dir = std::filesystem::temp_directory_path() / "preflab_trainer_bundle";
    std::filesystem::remove_all(dir);
    write_bundle(dir, sys, s.state, features::ExplorationConfig{});
    for (auto f : {"model.json", "features.json", "config.json", "validation_report.json", "system.json"})
      CHECK(std::filesystem::exists(dir / f));
    const auto back = read_bundle(dir);
    CHECK(back.model == sys.model);
    CHECK(back.label == sys.label);
    CHECK(back.features == sys.features);

    std::ifstream in(dir / "model.json");
    const auto mj = nlohmann::json::parse(in);
    for (const auto& id : s.split.test_ids) {
      const auto& img = s.dataset.image(id);
      const double got = predict(back, img, s.dl.at(id), nullptr).score;
      // hand evaluation from whatever linear parameters the file holds
      double manual = 0;
      bool found_intercept = false;
      for (const auto& [k, v] : mj.items())
        if (v.is_object() && v.contains("intercept")) {
          manual = v["intercept"].get<double>();
          const auto coef = v["coefficients"].get<std::vector<double>>();
          const auto names = mj.at("feature_names").get<std::vector<std::string>>();
          for (std::size_t c = 0; c < names.size(); ++c)
            manual += coef[c] * (names[c] == kDlColumn ? s.dl.at(id) : s.state.matrix.value(names[c], id));
          found_intercept = true;
        }
      REQUIRE(found_intercept);
      CHECK(std::abs(got - manual) < 1e-10);
    }
    std::filesystem::remove(dir / "model.json");
    CHECK_THROWS_AS(read_bundle(dir), std::runtime_error);
    std::filesystem::remove_all(dir);
  }
}
