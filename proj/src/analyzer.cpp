#include "peng/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "peng/error.hpp"
#include "peng/format.hpp"

namespace peng {
namespace {

bool is_multiple_of(double value, double step) {
  double ratio = value / step;
  return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio);
}

// True when every one of the last `n` tuples has a finite prediction within
// `t` of the window mean.
bool predictions_agree(const std::vector<PerformanceTuple>& tuples, std::size_t n, double t) {
  if (tuples.size() < n) return false;
  auto first = tuples.end() - static_cast<std::ptrdiff_t>(n);
  double sum = 0.0;
  for (auto it = first; it != tuples.end(); ++it) {
    if (!it->prediction || !std::isfinite(*it->prediction)) return false;
    sum += *it->prediction;
  }
  double mean = sum / static_cast<double>(n);
  return std::all_of(first, tuples.end(), [&](const PerformanceTuple& tuple) {
    return mean - t <= *tuple.prediction && *tuple.prediction <= mean + t;
  });
}

// The running-minimum val_loss was set at least `window` tuples before the latest one.
bool loss_is_stale(const std::vector<PerformanceTuple>& tuples, std::size_t window) {
  if (tuples.size() <= window) return false;
  std::size_t argmin = 0;
  for (std::size_t i = 1; i < tuples.size(); ++i) {
    if (tuples[i].val_loss < tuples[argmin].val_loss) argmin = i;
  }
  return (tuples.size() - 1) - argmin >= window;
}

}  // namespace

void AnalyzerConfig::validate() const {
  if (window < 1) throw Error(ErrorCode::invalid_argument, "N must be at least 1");
  if (!(epochs_per_iteration > 0.0) || !std::isfinite(epochs_per_iteration)) {
    throw Error(ErrorCode::invalid_argument, "E must be positive");
  }
  if (!(max_epochs > 0.0) || !is_multiple_of(max_epochs, epochs_per_iteration)) {
    throw Error(ErrorCode::invalid_argument, "e_max must be a positive multiple of E");
  }
  if (!(threshold > 0.0)) throw Error(ErrorCode::invalid_argument, "t must be positive");
  if (!(loss_epochs > 0.0) || !is_multiple_of(loss_epochs, epochs_per_iteration)) {
    throw Error(ErrorCode::invalid_argument, "L must be a positive multiple of E");
  }
  if (!(never_learn_margin >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "never-learn margin must be non-negative");
  }
}

std::size_t AnalyzerConfig::loss_window() const {
  // The small slack keeps exact multiples (5 / 0.5) from rounding up.
  return static_cast<std::size_t>(std::ceil(loss_epochs / epochs_per_iteration - 1e-9));
}

void DatasetProfile::validate() const {
  if (num_classes < 2) throw Error(ErrorCode::invalid_argument, "num_classes must be at least 2");
  if (class_fractions.empty()) return;
  if (class_fractions.size() != static_cast<std::size_t>(num_classes)) {
    throw Error(ErrorCode::invalid_argument, "profile " + name + ": expected " +
                                                 std::to_string(num_classes) +
                                                 " class fractions");
  }
  double total = 0.0;
  for (double f : class_fractions) {
    if (!(f > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "profile " + name + ": class fractions must be positive");
    }
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw Error(ErrorCode::invalid_argument,
                "profile " + name + ": class fractions sum to " + format_double(total));
  }
}

double DatasetProfile::largest_class_fraction() const {
  if (class_fractions.empty()) return 1.0 / num_classes;
  return *std::max_element(class_fractions.begin(), class_fractions.end());
}

double guessing_rate(const DatasetProfile& profile) {
  return 100.0 * std::max(1.0 / profile.num_classes, profile.largest_class_fraction());
}

double never_learn_threshold(const DatasetProfile& profile, double margin) {
  return guessing_rate(profile) + margin;
}

std::string_view to_string(DecisionKind kind) {
  switch (kind) {
    case DecisionKind::continue_training: return "continue";
    case DecisionKind::converged: return "converged";
    case DecisionKind::exhausted: return "exhausted";
  }
  return "unknown";
}

EngineDecision analyze(const History& history, const AnalyzerConfig& cfg,
                       const DatasetProfile& profile) {
  if (history.empty()) throw Error(ErrorCode::invalid_argument, "cannot analyze an empty history");
  const auto& tuples = history.tuples();
  const double epoch = tuples.back().epoch;

  const double min_epoch = static_cast<double>(cfg.window) * cfg.epochs_per_iteration;
  if (epoch < min_epoch || same_epoch(epoch, min_epoch)) return EngineDecision::keep_going();

  if (epoch > cfg.max_epochs || same_epoch(epoch, cfg.max_epochs)) {
    double best = 0.0;
    for (const auto& tuple : tuples) best = std::max(best, tuple.val_acc);
    return {DecisionKind::exhausted, best, false, epoch};
  }

  const auto& latest = tuples.back().prediction;
  if (!latest || !std::isfinite(*latest)) return EngineDecision::keep_going();
  const double estimate = *latest;

  if (estimate > 100.0) return EngineDecision::keep_going();
  if (!predictions_agree(tuples, cfg.window, cfg.threshold)) return EngineDecision::keep_going();

  if (cfg.loss_check && estimate <= never_learn_threshold(profile, cfg.never_learn_margin) &&
      !loss_is_stale(tuples, cfg.loss_window())) {
    return EngineDecision::keep_going();
  }
  return {DecisionKind::converged, estimate, true, epoch};
}

}  // namespace peng
