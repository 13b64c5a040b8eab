#pragma once

#include "peng/trace_io.hpp"

namespace peng {

/// Loss-plateau early termination used as the comparison point: train up to
/// `max_epochs`, stopping at the first epoch where the minimum training loss
/// seen so far was set at least `patience` epochs earlier.
///
/// Equal losses do not refresh the minimum. Throws Error(missing_train_loss)
/// if any row lacks train_loss.
double baseline_stop_epoch(const Trace& trace, double patience = 10.0, double max_epochs = 20.0);

}  // namespace peng
