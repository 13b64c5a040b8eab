#include "peng/predictor.hpp"

#include <cmath>

#include "peng/error.hpp"
#include "peng/format.hpp"

namespace peng {

bool same_epoch(double lhs, double rhs) {
  return std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::max(std::abs(lhs), std::abs(rhs)));
}

History::History(std::string model, double epochs_per_iteration)
    : model_(std::move(model)), epochs_per_iteration_(epochs_per_iteration) {
  if (!(epochs_per_iteration > 0.0) || !std::isfinite(epochs_per_iteration)) {
    throw Error(ErrorCode::invalid_argument, "epochs per iteration must be positive");
  }
}

double History::next_epoch() const {
  return static_cast<double>(tuples_.size() + 1) * epochs_per_iteration_;
}

const PerformanceTuple& History::append(double epoch, double val_acc, double val_loss) {
  if (!std::isfinite(epoch) || !std::isfinite(val_acc) || !std::isfinite(val_loss)) {
    throw Error(ErrorCode::non_finite_input, "model " + model_ + ": non-finite measurement");
  }
  if (val_acc < 0.0 || val_acc > 100.0 || val_loss < 0.0) {
    throw Error(ErrorCode::non_finite_input,
                "model " + model_ + ": val_acc must be in [0,100] and val_loss >= 0");
  }
  double expected = next_epoch();
  if (!same_epoch(epoch, expected)) {
    throw Error(ErrorCode::out_of_order_epoch, "model " + model_ + ": expected epoch " +
                                                   format_double(expected) + ", got " +
                                                   format_double(epoch));
  }
  tuples_.push_back(PerformanceTuple{model_, expected, val_acc, val_loss, std::nullopt});
  return tuples_.back();
}

void History::set_latest_prediction(double prediction) {
  if (tuples_.empty()) throw Error(ErrorCode::invalid_argument, "history is empty");
  tuples_.back().prediction = prediction;
}

std::vector<Point> rescale_epochs(const History& history, double epochs_per_iteration) {
  if (!(epochs_per_iteration > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "epochs per iteration must be positive");
  }
  if (history.empty()) throw Error(ErrorCode::invalid_argument, "cannot rescale an empty history");
  if (!same_epoch(history.tuples().front().epoch, epochs_per_iteration)) {
    throw Error(ErrorCode::first_epoch_mismatch,
                "first epoch " + format_double(history.tuples().front().epoch) +
                    " does not equal E=" + format_double(epochs_per_iteration));
  }
  std::vector<Point> points;
  points.reserve(history.size());
  for (const auto& tuple : history.tuples()) {
    // Epochs are validated multiples of E, so the quotient is integral up to rounding.
    points.push_back({std::round(tuple.epoch / epochs_per_iteration), tuple.val_acc});
  }
  return points;
}

std::optional<FitResult> record_and_predict(History& history, double epoch, double val_acc,
                                            double val_loss, const ParamBox& box,
                                            const FitConfig& cfg) {
  history.append(epoch, val_acc, val_loss);
  if (history.size() < cfg.c_min) return std::nullopt;

  auto points = rescale_epochs(history, history.epochs_per_iteration());
  FitResult result = fit(points, box, cfg);
  if (result.status != FitStatus::degenerate) history.set_latest_prediction(result.params.a);
  return result;
}

}  // namespace peng
