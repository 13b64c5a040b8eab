#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>

#include "peng/curve_model.hpp"

namespace peng {

struct FitConfig {
  std::size_t c_min = 3;
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-8;
  double cost_tolerance = 1e-8;
  /// Starting Marquardt damping, relative to diag(J^T J). The landscape has a
  /// spurious minimum near b = 1 on the c = 0 face; starting damped keeps the
  /// first step from landing in it.
  double initial_damping = 1.0;
  /// Finite stand-in for +inf upper bounds inside the solver.
  double infinity_cap = 1e12;
  /// Run four extra jittered starts besides box.init and keep the best.
  bool multi_start = false;
  std::uint64_t multi_start_seed = 0x5eedULL;

  void validate() const;
};

enum class FitStatus { ok, max_iterations, degenerate };

std::string_view to_string(FitStatus status);

struct FitResult {
  CurveParams params;
  bool converged = false;
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  FitStatus status = FitStatus::degenerate;
};

struct Point {
  double x;
  double y;
};

/// Called with every accepted iterate (including the starting point).
using IterateObserver = std::function<void(const CurveParams&)>;

/// Sum of squared residuals of `params` over `points`; +inf on overflow.
double sum_squared_residuals(const CurveParams& params, std::span<const Point> points) noexcept;

/// Bounded least-squares fit of a - b^(c - x) to `points`.
///
/// Damped Gauss-Newton (Levenberg-Marquardt with Marquardt scaling) on the
/// free variables, projecting every trial point back into the box. After
/// five consecutive rejected damped steps a projected-gradient step with
/// backtracking is tried instead. The returned params are always in the
/// box and never cost more than the start, whatever the status.
///
/// Throws Error(too_few_points) if fewer than cfg.c_min points are given and
/// Error(non_finite_input) on NaN/inf or non-increasing x.
FitResult fit(std::span<const Point> points, const ParamBox& box = default_box(),
              const FitConfig& cfg = {}, const IterateObserver& observer = {});

}  // namespace peng
