#pragma once

#include <span>
#include <string>
#include <vector>

namespace peng {

/// Engine and baseline results for one model, plus its full-horizon best accuracy.
struct ModelOutcome {
  std::string model;
  double engine_stop = 0.0;
  double engine_estimate = 0.0;
  bool engine_converged = false;
  double baseline_stop = 0.0;
  double ground_truth_best = 0.0;
};

struct ModelSavings {
  std::string model;
  double percent = 0.0;
};

struct SavingsReport {
  std::vector<ModelSavings> per_model;
  double mean = 0.0;
};

/// 100 * (baseline_stop - engine_stop) / baseline_stop per model; negative
/// when the engine ran longer than the baseline.
SavingsReport epochs_saved(std::span<const ModelOutcome> outcomes);

/// Models evaluable per unit of baseline compute: sum(baseline) / sum(engine).
double throughput_gain(std::span<const ModelOutcome> outcomes);

/// k = max(1, round(x/100 * n)).
std::size_t top_count(std::size_t n, double percent);

/// Top-k model ids by ground truth and by estimate. Ties go to the smaller model id.
std::vector<std::string> top_by_ground_truth(std::span<const ModelOutcome> outcomes, double percent);
std::vector<std::string> top_by_estimate(std::span<const ModelOutcome> outcomes, double percent);

/// |GT ∩ P| / |GT| for the top-x% sets (equal size k).
double top_overlap(std::span<const ModelOutcome> outcomes, double percent);

/// |mean ground_truth_best over GT - mean ground_truth_best over P|.
double mean_accuracy_diff(std::span<const ModelOutcome> outcomes, double percent);

struct DistributionSummary {
  double p5 = 0.0;
  double p25 = 0.0;
  double p50 = 0.0;
  double p75 = 0.0;
  double p95 = 0.0;
  double mean = 0.0;
};

/// Percentile at q in [0,100] of sorted values with linear interpolation
/// between closest ranks (position q/100 * (n-1)).
double percentile(std::span<const double> sorted, double q);
DistributionSummary distribution_summary(std::span<const double> values);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
};

/// Fixed-width bins over [lower, upper]; the last bin is closed and values
/// outside the range land in the nearest edge bin.
std::vector<HistogramBin> histogram(std::span<const double> values, double lower = -100.0,
                                    double upper = 100.0, double width = 10.0);

}  // namespace peng
