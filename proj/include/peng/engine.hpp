#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "peng/analyzer.hpp"
#include "peng/curve_model.hpp"
#include "peng/fitter.hpp"
#include "peng/keyvalue.hpp"
#include "peng/predictor.hpp"

namespace peng {

struct EngineConfig {
  AnalyzerConfig analyzer;
  FitConfig fit;
  ParamBox box = default_box();
  DatasetProfile profile;

  void validate() const;
};

/// Reads analyzer, fitter and box keys from a key=value document on top of
/// `base`. `loss_check` accepts true, false or auto; auto (the default)
/// enables the loss check exactly when `profile` is unbalanced.
EngineConfig engine_config_from(const KeyValueFile& kv, const DatasetProfile& profile,
                                EngineConfig base = {});

/// Inverse of engine_config_from for the keys it understands.
KeyValueFile to_keyvalue(const EngineConfig& config);

enum class SessionState { active, finished };

/// Estimation state for one model. The caller trains; the session is told the
/// validation result after every E epochs and answers whether to keep going.
class Session {
 public:
  Session(std::string model, EngineConfig config);

  /// Records the measurement, refits and analyzes. The first non-continue
  /// decision finishes the session. Throws Error(session_finished) after
  /// that and Error(out_of_order_epoch) on epoch gaps.
  EngineDecision step(double epoch, double val_acc, double val_loss);

  const std::string& model() const { return model_; }
  const EngineConfig& config() const { return config_; }
  const History& history() const { return history_; }
  SessionState state() const { return final_ ? SessionState::finished : SessionState::active; }
  const std::optional<EngineDecision>& final_decision() const { return final_; }
  const std::optional<FitResult>& last_fit() const { return last_fit_; }

 private:
  std::string model_;
  EngineConfig config_;
  History history_;
  std::optional<EngineDecision> final_;
  std::optional<FitResult> last_fit_;
};

/// Thread-safe map of sessions keyed by model id. Steps on different models
/// run concurrently; steps on one model are serialized.
class SessionRegistry {
 public:
  explicit SessionRegistry(EngineConfig defaults = {});

  const EngineConfig& defaults() const { return defaults_; }

  /// Throws Error(duplicate_model) if an active session already uses `model`.
  /// A finished session with the same id is replaced.
  void open(const std::string& model);
  void open(const std::string& model, EngineConfig config);

  /// Throws Error(unknown_model) if no session exists.
  EngineDecision step(const std::string& model, double epoch, double val_acc, double val_loss);

  /// Opens a session with the defaults when none is active, then steps.
  EngineDecision step_or_open(const std::string& model, double epoch, double val_acc,
                              double val_loss);

  bool close(const std::string& model);
  bool contains(const std::string& model) const;
  std::optional<SessionState> state(const std::string& model) const;
  std::size_t size() const;

 private:
  struct Entry {
    explicit Entry(Session s) : session(std::move(s)) {}
    std::mutex mutex;
    Session session;
  };

  std::shared_ptr<Entry> find(const std::string& model) const;

  EngineConfig defaults_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<Entry>> sessions_;
};

}  // namespace peng
