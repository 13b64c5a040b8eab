#include <vector>

#include "doctest.h"
#include "peng/analyzer.hpp"
#include "peng/error.hpp"

using namespace peng;

namespace {

struct Row {
  double acc;
  double loss;
  std::optional<double> prediction;
};

History make_history(const std::vector<Row>& rows, double E = 0.5) {
  History history("m", E);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    history.append(E * static_cast<double>(i + 1), rows[i].acc, rows[i].loss);
    if (rows[i].prediction) history.set_latest_prediction(*rows[i].prediction);
  }
  return history;
}

// Eight tuples (epoch 4.0), predictions only on the final three.
History window_history(double p1, double p2, double p3) {
  std::vector<Row> rows;
  for (int i = 0; i < 5; ++i) rows.push_back({40.0 + i, 2.0 - 0.1 * i, std::nullopt});
  rows.push_back({70, 1.4, p1});
  rows.push_back({75, 1.3, p2});
  rows.push_back({80, 1.2, p3});
  return make_history(rows);
}

const DatasetProfile kBalanced10{};

}  // namespace

TEST_CASE("never-learn thresholds") {
  CHECK(never_learn_threshold(kBalanced10) == doctest::Approx(10.5));
  DatasetProfile hundred{"c100", 100, {}, true};
  CHECK(never_learn_threshold(hundred) == doctest::Approx(1.5));
  DatasetProfile skewed{"svhn", 10, {0.19, 0.09, 0.09, 0.09, 0.09, 0.09, 0.09, 0.09, 0.09, 0.09}, false};
  skewed.validate();
  CHECK(never_learn_threshold(skewed) == doctest::Approx(19.5));
  CHECK(never_learn_threshold(kBalanced10, 2.0) == doctest::Approx(12.0));
}

TEST_CASE("tight window converges on the latest prediction") {
  AnalyzerConfig cfg;
  EngineDecision d = analyze(window_history(84.9, 85.1, 85.0), cfg, kBalanced10);
  CHECK(d.kind == DecisionKind::converged);
  CHECK(d.converged);
  REQUIRE(d.estimate.has_value());
  CHECK(*d.estimate == 85.0);
  CHECK(d.stop_epoch == 4.0);
}

TEST_CASE("estimate is the latest prediction, not the window mean") {
  EngineDecision d = analyze(window_history(85.3, 84.8, 84.9), {}, kBalanced10);
  REQUIRE(d.kind == DecisionKind::converged);
  CHECK(*d.estimate == 84.9);
}

TEST_CASE("a prediction above 100 blocks convergence") {
  EngineDecision d = analyze(window_history(101.7, 101.7, 101.7), {}, kBalanced10);
  CHECK(d.kind == DecisionKind::continue_training);
  CHECK_FALSE(d.estimate.has_value());
  CHECK(analyze(window_history(100.0, 100.0, 100.0), {}, kBalanced10).kind == DecisionKind::converged);
}

TEST_CASE("window spread boundary sits exactly at t") {
  CHECK(analyze(window_history(84.5, 85.5, 85.0), {}, kBalanced10).kind == DecisionKind::converged);
  CHECK(analyze(window_history(84.4, 85.5, 85.1), {}, kBalanced10).kind ==
        DecisionKind::continue_training);
  AnalyzerConfig loose;
  loose.threshold = 0.75;
  CHECK(analyze(window_history(84.4, 85.5, 85.1), loose, kBalanced10).kind == DecisionKind::converged);
}

TEST_CASE("a missing prediction inside the window means continue") {
  CHECK(analyze(window_history(85.0, 85.0, 85.0), {}, kBalanced10).finished());
  std::vector<Row> rows;
  for (int i = 0; i < 6; ++i) rows.push_back({40, 1, 85.0});
  rows.push_back({40, 1, std::nullopt});
  rows.push_back({40, 1, 85.0});
  CHECK(analyze(make_history(rows), {}, kBalanced10).kind == DecisionKind::continue_training);
}

TEST_CASE("nothing converges at or before N*E") {
  std::vector<Row> rows{{50, 1, 85.0}, {50, 1, 85.0}, {50, 1, 85.0}};
  CHECK(analyze(make_history(rows), {}, kBalanced10).kind == DecisionKind::continue_training);
  rows.push_back({50, 1, 85.0});
  CHECK(analyze(make_history(rows), {}, kBalanced10).kind == DecisionKind::converged);
}

TEST_CASE("reaching e_max falls back to the best observed accuracy") {
  std::vector<Row> rows;
  for (int i = 0; i < 40; ++i) {
    double acc = (i == 17) ? 34.2 : 20.0 + 0.1 * i;
    rows.push_back({acc, 1.0, 60.0 + 5.0 * (i % 2)});
  }
  EngineDecision d = analyze(make_history(rows), {}, kBalanced10);
  CHECK(d.kind == DecisionKind::exhausted);
  CHECK_FALSE(d.converged);
  REQUIRE(d.estimate.has_value());
  CHECK(*d.estimate == 34.2);
  CHECK(d.stop_epoch == 20.0);

  AnalyzerConfig short_run;
  short_run.max_epochs = 10.0;
  rows.resize(20);
  CHECK(analyze(make_history(rows), short_run, kBalanced10).kind == DecisionKind::exhausted);
}

TEST_CASE("never-learn loss check") {
  AnalyzerConfig cfg;
  cfg.loss_check = true;
  REQUIRE(cfg.loss_window() == 10);

  SUBCASE("a fresh loss minimum keeps training") {
    std::vector<Row> rows;
    for (int i = 0; i < 16; ++i) rows.push_back({10.0, 2.3, 10.0 + (i % 3 - 1) * 0.1});
    rows[11].loss = 2.2;  // epoch 6.0, two epochs before the latest at 8.0
    EngineDecision d = analyze(make_history(rows), cfg, kBalanced10);
    CHECK(d.kind == DecisionKind::continue_training);

    AnalyzerConfig off = cfg;
    off.loss_check = false;
    CHECK(analyze(make_history(rows), off, kBalanced10).kind == DecisionKind::converged);
  }

  SUBCASE("a loss minimum stale for L epochs converges") {
    std::vector<Row> rows;
    for (int i = 0; i < 16; ++i) rows.push_back({10.0, 2.3, 10.0 + (i % 3 - 1) * 0.1});
    rows[5].loss = 2.2;  // epoch 3.0, exactly ten tuples before the latest
    EngineDecision d = analyze(make_history(rows), cfg, kBalanced10);
    CHECK(d.kind == DecisionKind::converged);

    rows[5].loss = 2.3;
    rows[6].loss = 2.2;  // nine tuples before the latest
    CHECK(analyze(make_history(rows), cfg, kBalanced10).kind == DecisionKind::continue_training);
  }

  SUBCASE("predictions above the never-learn threshold skip the loss check") {
    std::vector<Row> rows;
    for (int i = 0; i < 16; ++i) rows.push_back({60.0, 2.0 - 0.1 * i, 60.0});
    CHECK(analyze(make_history(rows), cfg, kBalanced10).kind == DecisionKind::converged);
  }
}

TEST_CASE("analyze is a pure function of its inputs") {
  History history = window_history(84.9, 85.1, 85.0);
  EngineDecision first = analyze(history, {}, kBalanced10);
  for (int i = 0; i < 5; ++i) CHECK(analyze(history, {}, kBalanced10) == first);
}

TEST_CASE("configuration validation") {
  AnalyzerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.max_epochs = 20.25;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.threshold = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.window = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);

  DatasetProfile bad{"bad", 3, {0.5, 0.5, 0.5}, false};
  CHECK_THROWS_AS(bad.validate(), Error);
  DatasetProfile one{"one", 1, {}, true};
  CHECK_THROWS_AS(one.validate(), Error);
}
