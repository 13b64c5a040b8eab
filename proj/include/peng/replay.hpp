#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "peng/engine.hpp"
#include "peng/metrics.hpp"
#include "peng/trace_io.hpp"

namespace peng {

/// What the engine decided for one replayed trace.
struct ReplayOutcome {
  std::string model;
  double stop_epoch = 0.0;
  double estimate = 0.0;
  bool converged = false;
  /// Best val_acc over the whole trace, i.e. what full training would have shown.
  double ground_truth_best = 0.0;

  friend bool operator==(const ReplayOutcome&, const ReplayOutcome&) = default;
};

/// Feeds the trace row by row into a fresh session until it stops.
ReplayOutcome replay_trace(const Trace& trace, const EngineConfig& config);

/// Replays every trace on `jobs` worker threads; results are ordered by model id.
/// Throws Error(invalid_argument) when the config's E differs from the corpus
/// or e_max exceeds the corpus horizon.
std::vector<ReplayOutcome> replay_corpus(const TraceCorpus& corpus, const EngineConfig& config,
                                         unsigned jobs = 1);

// model,stop_epoch,estimate,converged,ground_truth_best
std::string format_outcomes_csv(const std::vector<ReplayOutcome>& outcomes);
std::vector<ReplayOutcome> parse_outcomes_csv(std::string_view csv, std::string_view source = "<outcomes>");

struct BaselineStop {
  std::string model;
  double stop_epoch = 0.0;
};

// model,baseline_stop_epoch
std::string format_baseline_csv(const std::vector<BaselineStop>& stops);
std::vector<BaselineStop> parse_baseline_csv(std::string_view csv, std::string_view source = "<baseline>");

std::vector<BaselineStop> baseline_corpus(const TraceCorpus& corpus, double patience, double max_epochs);

/// Joins replay and baseline results by model id. Throws Error(invariant_violation)
/// when either side is missing a model.
std::vector<ModelOutcome> join_outcomes(const std::vector<ReplayOutcome>& replay,
                                        const std::vector<BaselineStop>& baseline);

}  // namespace peng
