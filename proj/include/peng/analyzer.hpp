#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "peng/predictor.hpp"

namespace peng {

/// Convergence-analysis parameters; defaults are the published settings.
struct AnalyzerConfig {
  std::size_t window = 3;             // N: predictions that must agree
  double epochs_per_iteration = 0.5;  // E
  double max_epochs = 20.0;           // e_max
  double threshold = 0.5;             // t, accuracy percentage points
  bool loss_check = false;            // LOSS
  double loss_epochs = 5.0;           // L
  /// Added to the guessing rate to form the never-learn threshold.
  double never_learn_margin = 0.5;

  void validate() const;
  /// Number of trailing tuples covering `loss_epochs`: ceil(L / E).
  std::size_t loss_window() const;
};

struct DatasetProfile {
  std::string name = "default";
  int num_classes = 10;
  /// Per-class sample fractions; empty means uniform.
  std::vector<double> class_fractions;
  bool balanced = true;

  void validate() const;
  double largest_class_fraction() const;

  friend bool operator==(const DatasetProfile&, const DatasetProfile&) = default;
};

/// Accuracy (percent) of always guessing, or of always answering the largest class.
double guessing_rate(const DatasetProfile& profile);

/// Predictions at or below this value count as never-learn.
double never_learn_threshold(const DatasetProfile& profile, double margin = 0.5);

enum class DecisionKind { continue_training, converged, exhausted };

std::string_view to_string(DecisionKind kind);

struct EngineDecision {
  DecisionKind kind = DecisionKind::continue_training;
  std::optional<double> estimate;
  bool converged = false;
  std::optional<double> stop_epoch;

  bool finished() const { return kind != DecisionKind::continue_training; }

  static EngineDecision keep_going() { return {}; }
  friend bool operator==(const EngineDecision&, const EngineDecision&) = default;
};

/// Decides, after the latest tuple, whether training can stop.
///
///  - too few epochs (e <= N*E): continue
///  - e = e_max: exhausted, estimate = best observed val_acc
///  - otherwise converged with the latest prediction when it is <= 100, the
///    last N predictions all lie within t of their mean and, for never-learn
///    predictions with the loss check on, the minimum val_loss has not
///    improved over the last ceil(L/E) tuples.
EngineDecision analyze(const History& history, const AnalyzerConfig& cfg,
                       const DatasetProfile& profile);

}  // namespace peng
