#include "peng/replay.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <thread>

#include "peng/baseline.hpp"
#include "peng/error.hpp"
#include "peng/format.hpp"

namespace peng {
namespace {

std::vector<std::vector<std::string>> parse_csv_rows(std::string_view csv, std::string_view header,
                                                     std::string_view source) {
  std::vector<std::vector<std::string>> rows;
  const auto columns = split(header, ',').size();
  bool seen_header = false;
  std::size_t line_no = 0;
  for (const auto& raw : split(csv, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != header) {
        throw Error(ErrorCode::parse_error, std::string(source) + ":" + std::to_string(line_no) +
                                                ": expected header '" + std::string(header) + "'");
      }
      seen_header = true;
      continue;
    }
    auto fields = split(line, ',');
    if (fields.size() != columns) {
      throw Error(ErrorCode::parse_error, std::string(source) + ":" + std::to_string(line_no) +
                                              ": expected " + std::to_string(columns) + " fields");
    }
    rows.push_back(std::move(fields));
  }
  if (!seen_header) throw Error(ErrorCode::parse_error, std::string(source) + ": missing header row");
  return rows;
}

constexpr std::string_view kOutcomesHeader = "model,stop_epoch,estimate,converged,ground_truth_best";
constexpr std::string_view kBaselineHeader = "model,baseline_stop_epoch";

}  // namespace

ReplayOutcome replay_trace(const Trace& trace, const EngineConfig& config) {
  Session session(trace.model, config);
  for (const auto& row : trace.rows) {
    auto decision = session.step(row.epoch, row.val_acc, row.val_loss);
    if (decision.finished()) {
      return {trace.model, *decision.stop_epoch, *decision.estimate, decision.converged,
              trace.max_val_acc()};
    }
  }
  throw Error(ErrorCode::invariant_violation,
              "model " + trace.model + ": trace ended before the engine stopped");
}

std::vector<ReplayOutcome> replay_corpus(const TraceCorpus& corpus, const EngineConfig& config,
                                         unsigned jobs) {
  if (!same_epoch(config.analyzer.epochs_per_iteration, corpus.epochs_per_iteration)) {
    throw Error(ErrorCode::invalid_argument,
                "config E=" + format_double(config.analyzer.epochs_per_iteration) +
                    " does not match corpus E=" + format_double(corpus.epochs_per_iteration));
  }
  if (config.analyzer.max_epochs > corpus.full_epochs &&
      !same_epoch(config.analyzer.max_epochs, corpus.full_epochs)) {
    throw Error(ErrorCode::invalid_argument, "e_max exceeds the corpus horizon");
  }
  config.validate();

  std::vector<ReplayOutcome> outcomes(corpus.traces.size());
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(corpus.traces.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= corpus.traces.size()) return;
      try {
        outcomes[i] = replay_trace(corpus.traces[i], config);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::sort(outcomes.begin(), outcomes.end(),
            [](const ReplayOutcome& lhs, const ReplayOutcome& rhs) { return lhs.model < rhs.model; });
  return outcomes;
}

std::string format_outcomes_csv(const std::vector<ReplayOutcome>& outcomes) {
  std::string out(kOutcomesHeader);
  out += '\n';
  for (const auto& o : outcomes) {
    out += o.model + ',' + format_double(o.stop_epoch) + ',' + format_double(o.estimate) + ',' +
           (o.converged ? "true" : "false") + ',' + format_double(o.ground_truth_best) + '\n';
  }
  return out;
}

std::vector<ReplayOutcome> parse_outcomes_csv(std::string_view csv, std::string_view source) {
  std::vector<ReplayOutcome> out;
  for (const auto& f : parse_csv_rows(csv, kOutcomesHeader, source)) {
    std::string ctx = std::string(source) + ": model " + f[0];
    out.push_back({f[0], parse_double(f[1], ctx), parse_double(f[2], ctx), parse_bool(f[3], ctx),
                   parse_double(f[4], ctx)});
  }
  return out;
}

std::string format_baseline_csv(const std::vector<BaselineStop>& stops) {
  std::string out(kBaselineHeader);
  out += '\n';
  for (const auto& s : stops) out += s.model + ',' + format_double(s.stop_epoch) + '\n';
  return out;
}

std::vector<BaselineStop> parse_baseline_csv(std::string_view csv, std::string_view source) {
  std::vector<BaselineStop> out;
  for (const auto& f : parse_csv_rows(csv, kBaselineHeader, source)) {
    out.push_back({f[0], parse_double(f[1], std::string(source) + ": model " + f[0])});
  }
  return out;
}

std::vector<BaselineStop> baseline_corpus(const TraceCorpus& corpus, double patience,
                                          double max_epochs) {
  std::vector<BaselineStop> out;
  out.reserve(corpus.traces.size());
  for (const auto& trace : corpus.traces) {
    out.push_back({trace.model, baseline_stop_epoch(trace, patience, max_epochs)});
  }
  return out;
}

std::vector<ModelOutcome> join_outcomes(const std::vector<ReplayOutcome>& replay,
                                        const std::vector<BaselineStop>& baseline) {
  std::map<std::string, double> stops;
  for (const auto& b : baseline) {
    if (!stops.emplace(b.model, b.stop_epoch).second) {
      throw Error(ErrorCode::invariant_violation, "model " + b.model + " listed twice in baseline");
    }
  }
  if (stops.size() != replay.size()) {
    throw Error(ErrorCode::invariant_violation, "replay and baseline cover different model sets");
  }
  std::vector<ModelOutcome> out;
  out.reserve(replay.size());
  for (const auto& r : replay) {
    auto it = stops.find(r.model);
    if (it == stops.end()) {
      throw Error(ErrorCode::invariant_violation, "model " + r.model + " has no baseline stop");
    }
    out.push_back({r.model, r.stop_epoch, r.estimate, r.converged, it->second, r.ground_truth_best});
  }
  return out;
}

}  // namespace peng
