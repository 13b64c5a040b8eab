#include "peng/baseline.hpp"

#include "peng/error.hpp"

namespace peng {

double baseline_stop_epoch(const Trace& trace, double patience, double max_epochs) {
  if (!(patience > 0.0) || !(max_epochs > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "patience and max epochs must be positive");
  }
  if (trace.rows.empty()) throw Error(ErrorCode::invalid_argument, "model " + trace.model + ": empty trace");
  if (!trace.has_train_loss()) {
    throw Error(ErrorCode::missing_train_loss, "model " + trace.model + " has rows without train_loss");
  }
  double best_loss = *trace.rows.front().train_loss;
  double best_epoch = trace.rows.front().epoch;
  for (const auto& row : trace.rows) {
    if (row.epoch > max_epochs && !same_epoch(row.epoch, max_epochs)) break;
    if (*row.train_loss < best_loss) {
      best_loss = *row.train_loss;
      best_epoch = row.epoch;
    }
    double age = row.epoch - best_epoch;
    if (age >= patience || same_epoch(age, patience)) return row.epoch;
  }
  return max_epochs;
}

}  // namespace peng
