#include "peng/engine.hpp"

#include "peng/error.hpp"
#include "peng/format.hpp"

namespace peng {
namespace {

constexpr const char* kBoxKeys[3][3] = {
    {"a_lower", "a_upper", "a_init"},
    {"b_lower", "b_upper", "b_init"},
    {"c_lower", "c_upper", "c_init"},
};

}  // namespace

void EngineConfig::validate() const {
  analyzer.validate();
  fit.validate();
  box.validate();
  profile.validate();
}

EngineConfig engine_config_from(const KeyValueFile& kv, const DatasetProfile& profile,
                                EngineConfig base) {
  EngineConfig config = std::move(base);
  config.profile = profile;

  auto& an = config.analyzer;
  long long window = kv.get_int("N", static_cast<long long>(an.window));
  if (window < 1) throw Error(ErrorCode::invalid_argument, "N must be at least 1");
  an.window = static_cast<std::size_t>(window);
  an.epochs_per_iteration = kv.get_double("E", an.epochs_per_iteration);
  an.max_epochs = kv.get_double("e_max", an.max_epochs);
  an.threshold = kv.get_double("t", an.threshold);
  an.loss_epochs = kv.get_double("L", an.loss_epochs);
  an.never_learn_margin = kv.get_double("never_learn_margin", an.never_learn_margin);
  auto loss = kv.get("loss_check").value_or("auto");
  an.loss_check = loss == "auto" ? !profile.balanced : parse_bool(loss, "loss_check");

  auto& fc = config.fit;
  long long c_min = kv.get_int("c_min", static_cast<long long>(fc.c_min));
  if (c_min < 0) throw Error(ErrorCode::invalid_argument, "c_min must be non-negative");
  fc.c_min = static_cast<std::size_t>(c_min);
  fc.max_iterations = static_cast<int>(kv.get_int("max_iterations", fc.max_iterations));
  fc.gradient_tolerance = kv.get_double("gradient_tolerance", fc.gradient_tolerance);
  fc.step_tolerance = kv.get_double("step_tolerance", fc.step_tolerance);
  fc.cost_tolerance = kv.get_double("cost_tolerance", fc.cost_tolerance);
  fc.initial_damping = kv.get_double("initial_damping", fc.initial_damping);
  fc.infinity_cap = kv.get_double("infinity_cap", fc.infinity_cap);
  fc.multi_start = kv.get_bool("multi_start", fc.multi_start);
  fc.multi_start_seed =
      static_cast<std::uint64_t>(kv.get_int("multi_start_seed", static_cast<long long>(fc.multi_start_seed)));

  for (int i = 0; i < 3; ++i) {
    config.box.lower[i] = kv.get_double(kBoxKeys[i][0], config.box.lower[i]);
    config.box.upper[i] = kv.get_double(kBoxKeys[i][1], config.box.upper[i]);
    config.box.init[i] = kv.get_double(kBoxKeys[i][2], config.box.init[i]);
  }
  config.validate();
  return config;
}

KeyValueFile to_keyvalue(const EngineConfig& config) {
  KeyValueFile kv;
  const auto& an = config.analyzer;
  kv.set("N", std::to_string(an.window));
  kv.set("E", format_double(an.epochs_per_iteration));
  kv.set("e_max", format_double(an.max_epochs));
  kv.set("t", format_double(an.threshold));
  kv.set("loss_check", an.loss_check ? "true" : "false");
  kv.set("L", format_double(an.loss_epochs));
  kv.set("never_learn_margin", format_double(an.never_learn_margin));
  const auto& fc = config.fit;
  kv.set("c_min", std::to_string(fc.c_min));
  kv.set("max_iterations", std::to_string(fc.max_iterations));
  kv.set("gradient_tolerance", format_double(fc.gradient_tolerance));
  kv.set("step_tolerance", format_double(fc.step_tolerance));
  kv.set("cost_tolerance", format_double(fc.cost_tolerance));
  kv.set("initial_damping", format_double(fc.initial_damping));
  kv.set("infinity_cap", format_double(fc.infinity_cap));
  kv.set("multi_start", fc.multi_start ? "true" : "false");
  kv.set("multi_start_seed", std::to_string(fc.multi_start_seed));
  for (int i = 0; i < 3; ++i) {
    kv.set(kBoxKeys[i][0], format_double(config.box.lower[i]));
    kv.set(kBoxKeys[i][1], format_double(config.box.upper[i]));
    kv.set(kBoxKeys[i][2], format_double(config.box.init[i]));
  }
  return kv;
}

Session::Session(std::string model, EngineConfig config)
    : model_(std::move(model)),
      config_(std::move(config)),
      history_(model_, config_.analyzer.epochs_per_iteration) {
  if (model_.empty()) throw Error(ErrorCode::invalid_argument, "model id must not be empty");
  config_.validate();
}

EngineDecision Session::step(double epoch, double val_acc, double val_loss) {
  if (final_) {
    throw Error(ErrorCode::session_finished,
                "model " + model_ + " already stopped at epoch " +
                    format_double(final_->stop_epoch.value_or(0.0)));
  }
  last_fit_ = record_and_predict(history_, epoch, val_acc, val_loss, config_.box, config_.fit);
  EngineDecision decision = analyze(history_, config_.analyzer, config_.profile);
  if (decision.finished()) {
    decision.stop_epoch = history_.back().epoch;
    final_ = decision;
  }
  return decision;
}

SessionRegistry::SessionRegistry(EngineConfig defaults) : defaults_(std::move(defaults)) {
  defaults_.validate();
}

void SessionRegistry::open(const std::string& model) { open(model, defaults_); }

void SessionRegistry::open(const std::string& model, EngineConfig config) {
  auto entry = std::make_shared<Entry>(Session(model, std::move(config)));
  std::unique_lock lock(mutex_);
  auto it = sessions_.find(model);
  if (it != sessions_.end()) {
    std::lock_guard session_lock(it->second->mutex);
    if (it->second->session.state() == SessionState::active) {
      throw Error(ErrorCode::duplicate_model, "a session for model " + model + " is already active");
    }
    it->second = std::move(entry);
    return;
  }
  sessions_.emplace(model, std::move(entry));
}

std::shared_ptr<SessionRegistry::Entry> SessionRegistry::find(const std::string& model) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(model);
  return it == sessions_.end() ? nullptr : it->second;
}

EngineDecision SessionRegistry::step(const std::string& model, double epoch, double val_acc,
                                     double val_loss) {
  auto entry = find(model);
  if (!entry) throw Error(ErrorCode::unknown_model, "no session for model " + model);
  std::lock_guard lock(entry->mutex);
  return entry->session.step(epoch, val_acc, val_loss);
}

EngineDecision SessionRegistry::step_or_open(const std::string& model, double epoch,
                                             double val_acc, double val_loss) {
  if (!find(model)) {
    try {
      open(model);
    } catch (const Error& e) {
      // Another thread opened it first.
      if (e.code() != ErrorCode::duplicate_model) throw;
    }
  }
  return step(model, epoch, val_acc, val_loss);
}

bool SessionRegistry::close(const std::string& model) {
  std::unique_lock lock(mutex_);
  return sessions_.erase(model) > 0;
}

bool SessionRegistry::contains(const std::string& model) const { return find(model) != nullptr; }

std::optional<SessionState> SessionRegistry::state(const std::string& model) const {
  auto entry = find(model);
  if (!entry) return std::nullopt;
  std::lock_guard lock(entry->mutex);
  return entry->session.state();
}

std::size_t SessionRegistry::size() const {
  std::shared_lock lock(mutex_);
  return sessions_.size();
}

}  // namespace peng
