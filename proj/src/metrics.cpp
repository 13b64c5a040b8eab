#include "peng/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "peng/error.hpp"
#include "peng/format.hpp"

namespace peng {
namespace {

void require_outcomes(std::span<const ModelOutcome> outcomes) {
  if (outcomes.empty()) throw Error(ErrorCode::empty_outcomes, "no model outcomes");
}

void require_percent(double percent) {
  if (!(percent > 0.0 && percent <= 100.0)) {
    throw Error(ErrorCode::invalid_argument, "top percent must be in (0, 100], got " + format_double(percent));
  }
}

template <typename Key>
std::vector<std::string> top_k(std::span<const ModelOutcome> outcomes, double percent, Key key) {
  require_outcomes(outcomes);
  require_percent(percent);
  std::vector<const ModelOutcome*> order;
  order.reserve(outcomes.size());
  for (const auto& o : outcomes) order.push_back(&o);
  std::sort(order.begin(), order.end(), [&](const ModelOutcome* lhs, const ModelOutcome* rhs) {
    double l = key(*lhs);
    double r = key(*rhs);
    if (l != r) return l > r;
    return lhs->model < rhs->model;
  });
  std::size_t k = top_count(outcomes.size(), percent);
  std::vector<std::string> ids;
  ids.reserve(k);
  for (std::size_t i = 0; i < k; ++i) ids.push_back(order[i]->model);
  return ids;
}

}  // namespace

SavingsReport epochs_saved(std::span<const ModelOutcome> outcomes) {
  SavingsReport report;
  double total = 0.0;
  for (const auto& o : outcomes) {
    if (!(o.baseline_stop > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "model " + o.model + ": baseline stop must be positive");
    }
    double percent = 100.0 * (o.baseline_stop - o.engine_stop) / o.baseline_stop;
    report.per_model.push_back({o.model, percent});
    total += percent;
  }
  if (!outcomes.empty()) report.mean = total / static_cast<double>(outcomes.size());
  return report;
}

double throughput_gain(std::span<const ModelOutcome> outcomes) {
  require_outcomes(outcomes);
  double baseline = 0.0;
  double engine = 0.0;
  for (const auto& o : outcomes) {
    baseline += o.baseline_stop;
    engine += o.engine_stop;
  }
  if (!(engine > 0.0)) throw Error(ErrorCode::invalid_argument, "engine epochs sum to zero");
  return baseline / engine;
}

std::size_t top_count(std::size_t n, double percent) {
  auto k = static_cast<std::size_t>(std::llround(percent / 100.0 * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
}

std::vector<std::string> top_by_ground_truth(std::span<const ModelOutcome> outcomes, double percent) {
  return top_k(outcomes, percent, [](const ModelOutcome& o) { return o.ground_truth_best; });
}

std::vector<std::string> top_by_estimate(std::span<const ModelOutcome> outcomes, double percent) {
  return top_k(outcomes, percent, [](const ModelOutcome& o) { return o.engine_estimate; });
}

double top_overlap(std::span<const ModelOutcome> outcomes, double percent) {
  auto truth = top_by_ground_truth(outcomes, percent);
  auto predicted = top_by_estimate(outcomes, percent);
  std::unordered_set<std::string> predicted_set(predicted.begin(), predicted.end());
  auto shared = std::count_if(truth.begin(), truth.end(),
                              [&](const std::string& id) { return predicted_set.count(id) > 0; });
  return static_cast<double>(shared) / static_cast<double>(truth.size());
}

double mean_accuracy_diff(std::span<const ModelOutcome> outcomes, double percent) {
  auto truth = top_by_ground_truth(outcomes, percent);
  auto predicted = top_by_estimate(outcomes, percent);
  auto mean_actual = [&](const std::vector<std::string>& ids) {
    std::unordered_set<std::string> wanted(ids.begin(), ids.end());
    double sum = 0.0;
    for (const auto& o : outcomes) {
      if (wanted.count(o.model)) sum += o.ground_truth_best;
    }
    return sum / static_cast<double>(ids.size());
  };
  return std::abs(mean_actual(truth) - mean_actual(predicted));
}

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::invalid_argument, "percentile of empty set");
  double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

DistributionSummary distribution_summary(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::invalid_argument, "distribution of empty set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  DistributionSummary s;
  s.p5 = percentile(sorted, 5);
  s.p25 = percentile(sorted, 25);
  s.p50 = percentile(sorted, 50);
  s.p75 = percentile(sorted, 75);
  s.p95 = percentile(sorted, 95);
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  return s;
}

std::vector<HistogramBin> histogram(std::span<const double> values, double lower, double upper,
                                    double width) {
  if (!(upper > lower) || !(width > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "histogram needs upper > lower and width > 0");
  }
  auto count = static_cast<std::size_t>(std::ceil((upper - lower) / width - 1e-9));
  std::vector<HistogramBin> bins(count);
  for (std::size_t i = 0; i < count; ++i) {
    bins[i].lower = lower + width * static_cast<double>(i);
    bins[i].upper = std::min(upper, bins[i].lower + width);
  }
  for (double v : values) {
    double slot = std::floor((v - lower) / width);
    auto idx = static_cast<std::size_t>(std::clamp(slot, 0.0, static_cast<double>(count - 1)));
    ++bins[idx].count;
  }
  return bins;
}

}  // namespace peng
