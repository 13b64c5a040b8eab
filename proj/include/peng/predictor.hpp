#pragma once

#include <optional>
#include <string>
#include <vector>

#include "peng/curve_model.hpp"
#include "peng/fitter.hpp"

namespace peng {

/// One validation record for a model plus the asymptote predicted right after it.
struct PerformanceTuple {
  std::string model;
  double epoch = 0.0;
  double val_acc = 0.0;
  double val_loss = 0.0;
  std::optional<double> prediction;

  friend bool operator==(const PerformanceTuple&, const PerformanceTuple&) = default;
};

/// Epoch-ordered validation history of a single model, sampled every
/// `epochs_per_iteration` epochs starting at that value.
class History {
 public:
  History(std::string model, double epochs_per_iteration);

  const std::string& model() const { return model_; }
  double epochs_per_iteration() const { return epochs_per_iteration_; }

  const std::vector<PerformanceTuple>& tuples() const { return tuples_; }
  std::size_t size() const { return tuples_.size(); }
  bool empty() const { return tuples_.empty(); }
  const PerformanceTuple& back() const { return tuples_.back(); }

  /// Epoch the next record must carry.
  double next_epoch() const;

  /// Appends a measurement. Throws Error(out_of_order_epoch) unless `epoch`
  /// equals next_epoch() and Error(non_finite_input) on bad values.
  const PerformanceTuple& append(double epoch, double val_acc, double val_loss);

  /// Sets the prediction of the most recent tuple; earlier tuples are immutable.
  void set_latest_prediction(double prediction);

 private:
  std::string model_;
  double epochs_per_iteration_;
  std::vector<PerformanceTuple> tuples_;
};

/// Tolerant epoch comparison for multiples of E.
bool same_epoch(double lhs, double rhs);

/// Maps epochs E, 2E, 3E, ... to x = 1, 2, 3, ...
/// Throws Error(first_epoch_mismatch) if the first epoch is not E.
std::vector<Point> rescale_epochs(const History& history, double epochs_per_iteration);

/// Appends the measurement and, once at least cfg.c_min tuples exist, fits
/// the curve to the rescaled history and stores the fitted asymptote as the
/// new tuple's prediction. A degenerate fit leaves the prediction empty.
/// Earlier tuples are never modified.
///
/// Returns the fit diagnostics when a fit ran.
std::optional<FitResult> record_and_predict(History& history, double epoch, double val_acc,
                                            double val_loss, const ParamBox& box,
                                            const FitConfig& cfg);

}  // namespace peng
