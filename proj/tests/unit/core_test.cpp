#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "preflab/core/dataset.hpp"
#include "preflab/core/discretize.hpp"
#include "preflab/core/random.hpp"
#include "preflab/core/scores.hpp"
#include "preflab/core/split.hpp"
#include "test_fixtures.hpp"

using namespace preflab;

TEST_SUITE("dataset") {
  TEST_CASE("300 valid lines ingest to 300 records") {
    auto ds = testing::make_dataset(300, 1);
    std::stringstream ss;
    serialize_dataset(ds, ss);
    auto back = ingest_dataset(ss);
    CHECK(back.size() == 300);
  }

  TEST_CASE("empty manifest yields an empty dataset") {
    std::istringstream in("");
    CHECK(ingest_dataset(in).empty());
  }

  TEST_CASE("off-grid rating is rejected with its line number") {
    std::istringstream in(
        R"({"image_id":"a","category":"plant","rating_class":"Low","rating":3.5,"uri":"a.jpg"})"
        "\n"
        R"({"image_id":"b","category":"plant","rating_class":"Low","rating":3.7,"uri":"b.jpg"})");
    try {
      ingest_dataset(in);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("rating not on 0.5 grid") != std::string::npos);
    }
  }

  TEST_CASE("unknown category, duplicates and malformed lines are rejected") {
    auto expect_line = [](const std::string& text, std::size_t line) {
      std::istringstream in(text);
      try {
        ingest_dataset(in);
        FAIL("expected DataError");
      } catch (const DataError& e) {
        CHECK(e.line() == line);
      }
    };
    const std::string ok =
        R"({"image_id":"a","category":"plant","rating_class":"Low","rating":3.5,"uri":"a.jpg"})";
    expect_line(R"({"image_id":"a","category":"car","rating_class":"Low","rating":3.5,"uri":"a"})", 1);
    expect_line(ok + "\n" + ok, 2);
    expect_line(ok + "\n\nnot json", 3);
    expect_line(R"({"image_id":"a","category":"plant","rating_class":"Top","rating":3.5,"uri":"a"})", 1);
    expect_line(R"({"image_id":"a","category":"plant","rating_class":"Low","rating":5.5,"uri":"a"})", 1);
    expect_line(R"({"image_id":"a","category":"plant","rating_class":"Low","rating":3.5})", 1);
  }

  TEST_CASE("ingest after serialize is the identity (random datasets)") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
      auto ds = testing::make_dataset(static_cast<std::size_t>(rng.below(40)), rng.next_u64());
      std::stringstream ss;
      serialize_dataset(ds, ss);
      CHECK(ingest_dataset(ss) == ds);
    }
  }
}

TEST_SUITE("split") {
  TEST_CASE("300 images with n_te=45 give 45/204/51 and 153/51") {
    auto ds = testing::make_dataset(300, 3);
    auto s = split_dataset(ds, {45, false}, 11);
    CHECK(s.test_ids.size() == 45);
    CHECK(s.train_ids.size() == 204);
    CHECK(s.val_ids.size() == 51);
    CHECK(s.inner_train_ids.size() == 153);
    CHECK(s.inner_val_ids.size() == 51);
  }

  TEST_CASE("same seed gives identical splits") {
    auto ds = testing::make_dataset(300, 3);
    CHECK(split_dataset(ds, {45, false}, 5) == split_dataset(ds, {45, false}, 5));
  }

  TEST_CASE("distinct seeds give distinct test sets (Monte Carlo)") {
    auto ds = testing::make_dataset(300, 3);
    int differ = 0;
    for (std::uint64_t k = 0; k < 100; ++k) {
      auto a = split_dataset(ds, {45, false}, 2 * k + 1000);
      auto b = split_dataset(ds, {45, false}, 2 * k + 1001);
      std::set<std::string> sa(a.test_ids.begin(), a.test_ids.end());
      std::set<std::string> sb(b.test_ids.begin(), b.test_ids.end());
      differ += sa != sb;
    }
    CHECK(differ >= 99);
  }

  TEST_CASE("n_te >= dataset size is rejected") {
    auto ds = testing::make_dataset(10, 3);
    CHECK_THROWS_AS(split_dataset(ds, {10, false}, 1), DataError);
  }

  TEST_CASE("split is a partition for random sizes and seeds") {
    Rng rng(7);
    for (bool stratify : {false, true}) {
      for (int trial = 0; trial < 200; ++trial) {
        const auto n = 2 + static_cast<std::size_t>(rng.below(400));
        const auto n_te = static_cast<std::size_t>(rng.below(n));
        auto ds = testing::make_dataset(n, rng.next_u64());
        auto s = split_dataset(ds, {n_te, stratify}, rng.next_u64());
        std::multiset<std::string> all(s.test_ids.begin(), s.test_ids.end());
        all.insert(s.train_ids.begin(), s.train_ids.end());
        all.insert(s.val_ids.begin(), s.val_ids.end());
        auto ids = ds.ids();
        CHECK(all == std::multiset<std::string>(ids.begin(), ids.end()));
        std::multiset<std::string> inner(s.inner_train_ids.begin(), s.inner_train_ids.end());
        inner.insert(s.inner_val_ids.begin(), s.inner_val_ids.end());
        CHECK(inner == std::multiset<std::string>(s.train_ids.begin(), s.train_ids.end()));
        const auto rem = n - n_te;
        CHECK(s.val_ids.size() == static_cast<std::size_t>(std::lround(rem / 5.0)));
        // 4:1 and 3:1 within one image of the exact ratio
        CHECK(std::abs(static_cast<double>(s.train_ids.size()) - 4.0 * static_cast<double>(s.val_ids.size())) <= 4.0);
        CHECK(std::abs(static_cast<double>(s.inner_train_ids.size()) -
                       3.0 * static_cast<double>(s.inner_val_ids.size())) <= 3.0);
      }
    }
  }

  TEST_CASE("stratified split keeps category proportions close") {
    auto ds = testing::make_dataset(300, 8);
    auto s = split_dataset(ds, {45, true}, 21);
    std::map<Category, int> counts;
    for (const auto& id : s.test_ids) ++counts[ds.image(id).category];
    for (auto& [c, k] : counts) CHECK(std::abs(k - 9) <= 1);
  }

  TEST_CASE("split json round trip") {
    auto ds = testing::make_dataset(50, 8);
    auto s = split_dataset(ds, {10, false}, 4);
    CHECK(split_from_json(split_to_json(s)) == s);
  }
}

namespace {

// Analytic round-half-to-even for x = k/16, in sixteenths: independent of
// floating-point rounding modes.
double analytic_round_sixteenths(long k) {
  k = std::clamp(k, 16L, 80L);
  const long q = k / 8, rem = k % 8;
  long halves = q;
  if (rem > 4 || (rem == 4 && q % 2 == 1)) halves = q + 1;
  return static_cast<double>(halves) / 2.0;
}

}  // namespace

TEST_SUITE("discretize") {
  TEST_CASE("spec ties and clipping") {
    CHECK(clip_and_round(3.25).value() == 3.0);
    CHECK(clip_and_round(3.75).value() == 4.0);
    CHECK(clip_and_round(5.3).value() == 5.0);
    CHECK(clip_and_round(0.2).value() == 1.0);
  }

  TEST_CASE("non-finite input is rejected") {
    CHECK_THROWS_AS(clip_and_round(std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(clip_and_round(INFINITY), std::invalid_argument);
  }

  TEST_CASE("matches the analytic table on sixteenth points in [0.75, 5.25]") {
    for (long k = 12; k <= 84; ++k) CHECK(clip_and_round(static_cast<double>(k) / 16.0).value() == analytic_round_sixteenths(k));
  }

  TEST_CASE("range and distance bounds on random reals") {
    Rng rng(2024);
    for (int i = 0; i < 100000; ++i) {
      const double x = -2.0 + 9.0 * rng.uniform();
      const double v = clip_and_round(x).value();
      CHECK(on_rating_grid(v));
      CHECK(std::abs(v - std::clamp(x, 1.0, 5.0)) <= 0.25);
    }
  }

  TEST_CASE("discrete score grid validation") {
    CHECK_NOTHROW(DiscreteScore(4.5));
    CHECK_THROWS(DiscreteScore(4.2));
  }
}

TEST_SUITE("scores") {
  TEST_CASE("score file round trip and validation") {
    PredictorScores s;
    s.predictor_name = "DL";
    s.provenance = "mean of 5 DL runs";
    s.by_participant["default"] = {{"img_000", 3.2}, {"img_001", 4.1}};
    std::stringstream ss;
    write_predictor_scores(s, ss);
    auto back = read_predictor_scores(ss);
    CHECK(back == s);
    auto ds = testing::make_dataset(5, 1);
    CHECK_NOTHROW(back.validate_against(ds));
    s.by_participant["default"]["zzz"] = 1.0;
    CHECK_THROWS_AS(s.validate_against(ds), DataError);
  }

  TEST_CASE("multi-participant file keeps participants apart") {
    std::istringstream in(R"({"predictor_name":"H","provenance":"x","kind":"human","rater":"P9"}
{"image_id":"a","score":3,"participant":"P1"}
{"image_id":"a","score":4,"participant":"P2"})");
    auto s = read_predictor_scores(in);
    CHECK(s.kind == "human");
    CHECK(s.rater == "P9");
    CHECK(s.scores("P1").at("a") == 3.0);
    CHECK(s.scores("P2").at("a") == 4.0);
    CHECK_THROWS_AS(s.scores(), DataError);
  }

  TEST_CASE("missing header is an error") {
    std::istringstream in(R"({"image_id":"a","score":3})");
    CHECK_THROWS_AS(read_predictor_scores(in), DataError);
  }
}

TEST_SUITE("random") {
  TEST_CASE("bounded draws stay in range and cover it") {
    Rng rng(1);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
      auto v = rng.below(7);
      CHECK(v < 7);
      seen.insert(v);
    }
    CHECK(seen.size() == 7);
  }
  TEST_CASE("derived seeds differ by tag and are stable") {
    CHECK(derive_seed(1, {2}) != derive_seed(1, {3}));
    CHECK(derive_seed(1, {2}) == derive_seed(1, {2}));
  }
  TEST_CASE("normal draws have roughly unit moments") {
    Rng rng(5);
    double s = 0, s2 = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double z = rng.normal();
      s += z;
      s2 += z * z;
    }
    CHECK(std::abs(s / n) < 0.05);
    CHECK(std::abs(s2 / n - 1.0) < 0.05);
  }
}
