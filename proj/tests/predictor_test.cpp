#include <cmath>
#include <vector>

#include "doctest.h"
#include "peng/error.hpp"
#include "peng/predictor.hpp"

using namespace peng;

namespace {

template <typename F>
void expect_code(ErrorCode code, F&& action) {
  try {
    action();
    FAIL("expected " << to_string(code));
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

}  // namespace

TEST_CASE("the first two tuples carry no prediction") {
  History history("nn-001", 0.5);
  auto fit1 = record_and_predict(history, 0.5, 4.1, 4.6, default_box(), {});
  CHECK_FALSE(fit1.has_value());
  CHECK(history.size() == 1);
  CHECK_FALSE(history.back().prediction.has_value());

  record_and_predict(history, 1.0, 20.0, 3.0, default_box(), {});
  CHECK_FALSE(history.back().prediction.has_value());

  auto fit3 = record_and_predict(history, 1.5, 30.0, 2.5, default_box(), {});
  REQUIRE(fit3.has_value());
  REQUIRE(history.back().prediction.has_value());
  CHECK(*history.back().prediction >= 0.5);
  CHECK(*history.back().prediction <= 102.5);
  CHECK(*history.back().prediction == fit3->params.a);
}

TEST_CASE("forty noiseless tuples pin the asymptote") {
  CurveParams truth{85, 1.5, 2};
  History history("nn-001", 0.5);
  for (int k = 1; k <= 40; ++k) {
    record_and_predict(history, 0.5 * k, evaluate(truth, k), 1.0, default_box(), {});
  }
  REQUIRE(history.back().prediction.has_value());
  CHECK(std::abs(*history.back().prediction - 85.0) <= 1e-2);
}

TEST_CASE("rescale examples") {
  History half("m", 0.5);
  for (double e : {0.5, 1.0, 1.5}) half.append(e, 50, 1);
  auto x = rescale_epochs(half, 0.5);
  REQUIRE(x.size() == 3);
  CHECK(x[0].x == 1.0);
  CHECK(x[1].x == 2.0);
  CHECK(x[2].x == 3.0);

  History whole("m", 1.0);
  for (double e : {1.0, 2.0, 3.0}) whole.append(e, 50, 1);
  auto y = rescale_epochs(whole, 1.0);
  CHECK(y[0].x == 1.0);
  CHECK(y[2].x == 3.0);

  History quarter("m", 0.25);
  for (double e : {0.25, 0.5}) quarter.append(e, 50, 1);
  auto z = rescale_epochs(quarter, 0.25);
  REQUIRE(z.size() == 2);
  CHECK(z[0].x == 1.0);
  CHECK(z[1].x == 2.0);

  expect_code(ErrorCode::first_epoch_mismatch, [&] { rescale_epochs(whole, 0.5); });
}

TEST_CASE("rescaling makes the epoch grid irrelevant to the fit") {
  std::vector<double> acc{12, 25, 36, 44, 50, 55, 58, 61, 62.5, 64};
  History half("m", 0.5);
  History whole("m", 1.0);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    record_and_predict(half, 0.5 * (i + 1), acc[i], 1.0, default_box(), {});
    record_and_predict(whole, 1.0 * (i + 1), acc[i], 1.0, default_box(), {});
  }
  for (std::size_t i = 0; i < acc.size(); ++i) {
    CHECK(half.tuples()[i].prediction == whole.tuples()[i].prediction);
  }
}

TEST_CASE("recording only writes the newly appended tuple") {
  History history("m", 0.5);
  std::vector<PerformanceTuple> snapshot;
  for (int k = 1; k <= 15; ++k) {
    record_and_predict(history, 0.5 * k, 80.0 - 60.0 * std::pow(0.7, k), 2.0 / k, default_box(), {});
    for (std::size_t i = 0; i < snapshot.size(); ++i) CHECK(history.tuples()[i] == snapshot[i]);
    snapshot = history.tuples();
    CHECK(history.tuples()[k - 1].prediction.has_value() == (k >= 3));
  }
}

TEST_CASE("append validates its input") {
  History history("m", 0.5);
  expect_code(ErrorCode::out_of_order_epoch, [&] { history.append(1.0, 10, 1); });
  history.append(0.5, 10, 1);
  expect_code(ErrorCode::out_of_order_epoch, [&] { history.append(0.5, 10, 1); });
  expect_code(ErrorCode::out_of_order_epoch, [&] { history.append(1.5, 10, 1); });
  expect_code(ErrorCode::non_finite_input, [&] { history.append(1.0, std::nan(""), 1); });
  expect_code(ErrorCode::non_finite_input, [&] { history.append(1.0, 101, 1); });
  expect_code(ErrorCode::non_finite_input, [&] { history.append(1.0, 10, -0.1); });
  CHECK(history.size() == 1);
  CHECK(history.next_epoch() == 1.0);
}

TEST_CASE("epoch comparison tolerates accumulated rounding") {
  double e = 0.0;
  for (int i = 0; i < 30; ++i) e += 0.1;
  CHECK(same_epoch(e, 3.0));
  CHECK_FALSE(same_epoch(3.0, 3.0001));
}
