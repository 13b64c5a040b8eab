#include "peng/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "peng/error.hpp"

namespace peng {
namespace {

constexpr int kRejectionsBeforeFallback = 5;
constexpr double kMaxDamping = 1e20;
constexpr double kMinDamping = 1e-12;

struct Bounds {
  Vec3 lower;
  Vec3 upper;

  Vec3 project(Vec3 p) const {
    for (int i = 0; i < 3; ++i) p[i] = std::clamp(p[i], lower[i], upper[i]);
    return p;
  }
};

// Residuals r_i = y_i - f(x_i) and the model Jacobian J_ij = df(x_i)/dp_j.
struct Linearization {
  std::vector<double> residuals;
  std::vector<Vec3> jacobian;
  double cost = 0.0;
};

std::optional<Linearization> linearize(const CurveParams& p, std::span<const Point> points) {
  Linearization lin;
  lin.residuals.reserve(points.size());
  lin.jacobian.reserve(points.size());
  for (const auto& pt : points) {
    auto value = try_evaluate(p, pt.x);
    auto grad = try_partials(p, pt.x);
    if (!value || !grad) return std::nullopt;
    double r = pt.y - *value;
    lin.residuals.push_back(r);
    lin.jacobian.push_back(*grad);
    lin.cost += r * r;
  }
  if (!std::isfinite(lin.cost)) return std::nullopt;
  return lin;
}

using Mat3 = std::array<Vec3, 3>;

// Solves A x = rhs restricted to the indices in `free` (others are zero).
std::optional<Vec3> solve_free(Mat3 a, Vec3 rhs, const std::array<bool, 3>& free) {
  std::array<int, 3> idx{};
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    if (free[i]) idx[n++] = i;
  }
  Vec3 out{0.0, 0.0, 0.0};
  if (n == 0) return out;

  double m[3][4] = {};
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m[r][c] = a[idx[r]][idx[c]];
    m[r][n] = rhs[idx[r]];
  }
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (!(std::abs(m[pivot][col]) > 0.0) || !std::isfinite(m[pivot][col])) return std::nullopt;
    if (pivot != col) {
      for (int c = 0; c <= n; ++c) std::swap(m[pivot][c], m[col][c]);
    }
    for (int r = col + 1; r < n; ++r) {
      double factor = m[r][col] / m[col][col];
      for (int c = col; c <= n; ++c) m[r][c] -= factor * m[col][c];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double acc = m[r][n];
    for (int c = r + 1; c < n; ++c) acc -= m[r][c] * out[idx[c]];
    out[idx[r]] = acc / m[r][r];
    if (!std::isfinite(out[idx[r]])) return std::nullopt;
  }
  return out;
}

struct NormalEquations {
  Mat3 jtj{};
  Vec3 jtr{};  // descent direction for the cost: -0.5 * d(cost)/dp
};

NormalEquations normal_equations(const Linearization& lin) {
  NormalEquations ne;
  for (std::size_t i = 0; i < lin.residuals.size(); ++i) {
    const auto& row = lin.jacobian[i];
    for (int r = 0; r < 3; ++r) {
      ne.jtr[r] += row[r] * lin.residuals[i];
      for (int c = 0; c < 3; ++c) ne.jtj[r][c] += row[r] * row[c];
    }
  }
  return ne;
}

// Variables sitting on a bound with the descent direction pointing outward
// are held fixed for this iteration.
std::array<bool, 3> free_set(const Vec3& p, const Vec3& descent, const Bounds& bounds) {
  std::array<bool, 3> free{true, true, true};
  for (int i = 0; i < 3; ++i) {
    if (p[i] <= bounds.lower[i] && descent[i] < 0.0) free[i] = false;
    if (p[i] >= bounds.upper[i] && descent[i] > 0.0) free[i] = false;
  }
  return free;
}

// Infinity norm of the projected gradient, each component scaled by max(1, |p_i|).
double projected_gradient_norm(const Vec3& p, const Vec3& descent, const Bounds& bounds) {
  auto free = free_set(p, descent, bounds);
  double norm = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (!free[i]) continue;
    norm = std::max(norm, 2.0 * std::abs(descent[i]) * std::max(1.0, std::abs(p[i])));
  }
  return norm;
}

double norm2(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

// ||r - J d||^2 for the linear model of the residuals.
double model_cost(const Linearization& lin, const Vec3& d) {
  double cost = 0.0;
  for (std::size_t i = 0; i < lin.residuals.size(); ++i) {
    const auto& row = lin.jacobian[i];
    double r = lin.residuals[i] - (row[0] * d[0] + row[1] * d[1] + row[2] * d[2]);
    cost += r * r;
  }
  return cost;
}

FitResult fit_from(const Vec3& start, std::span<const Point> points, const Bounds& bounds,
                   const FitConfig& cfg, const IterateObserver& observer) {
  FitResult result;
  Vec3 p = bounds.project(start);
  result.params = from_vec(p);

  auto lin = linearize(result.params, points);
  if (!lin) {
    result.initial_cost = result.final_cost = HUGE_VAL;
    result.status = FitStatus::degenerate;
    return result;
  }
  result.initial_cost = result.final_cost = lin->cost;
  if (observer) observer(result.params);

  double scale_y = 0.0;
  for (const auto& pt : points) scale_y += pt.y * pt.y;
  const double exact_fit = 1e-28 * std::max(1.0, scale_y);

  double damping = cfg.initial_damping;
  int rejections = 0;

  auto accept = [&](const Vec3& next, Linearization next_lin) {
    p = next;
    lin = std::move(next_lin);
    result.params = from_vec(p);
    result.final_cost = lin->cost;
    if (observer) observer(result.params);
  };

  auto finish = [&](FitStatus status) {
    result.status = status;
    result.converged = status == FitStatus::ok;
    return result;
  };

  while (true) {
    if (lin->cost <= exact_fit) return finish(FitStatus::ok);

    auto ne = normal_equations(*lin);
    auto free = free_set(p, ne.jtr, bounds);
    if (projected_gradient_norm(p, ne.jtr, bounds) <=
        cfg.gradient_tolerance * std::max(1.0, lin->cost)) {
      return finish(FitStatus::ok);
    }
    if (result.iterations >= cfg.max_iterations) return finish(FitStatus::max_iterations);
    ++result.iterations;

    Vec3 diag{};
    double max_diag = 0.0;
    for (int i = 0; i < 3; ++i) max_diag = std::max(max_diag, ne.jtj[i][i]);
    for (int i = 0; i < 3; ++i) diag[i] = std::max(ne.jtj[i][i], 1e-12 * max_diag + 1e-300);

    std::optional<Vec3> trial;
    bool fallback = rejections >= kRejectionsBeforeFallback || damping > kMaxDamping;
    if (!fallback) {
      Mat3 damped = ne.jtj;
      for (int i = 0; i < 3; ++i) damped[i][i] += damping * diag[i];
      if (auto step = solve_free(damped, ne.jtr, free)) {
        Vec3 candidate{};
        for (int i = 0; i < 3; ++i) candidate[i] = p[i] + (*step)[i];
        trial = bounds.project(candidate);
      }
      if (trial && *trial != p) {
        auto trial_lin = linearize(from_vec(*trial), points);
        if (trial_lin && trial_lin->cost < lin->cost) {
          double previous_cost = lin->cost;
          Vec3 previous = p;
          accept(*trial, std::move(*trial_lin));
          damping = std::max(damping / 10.0, kMinDamping);
          rejections = 0;

          // Convergence on cost or step is judged against the undamped
          // Gauss-Newton step, so a heavily damped small step is not
          // mistaken for convergence.
          auto ne_next = normal_equations(*lin);
          auto free_next = free_set(p, ne_next.jtr, bounds);
          Mat3 gn = ne_next.jtj;
          for (int i = 0; i < 3; ++i) gn[i][i] += 1e-12 * std::max(gn[i][i], 1e-300);
          if (auto gn_step = solve_free(gn, ne_next.jtr, free_next)) {
            Vec3 target{};
            for (int i = 0; i < 3; ++i) target[i] = p[i] + (*gn_step)[i];
            target = bounds.project(target);
            Vec3 gn_delta{};
            for (int i = 0; i < 3; ++i) gn_delta[i] = target[i] - p[i];
            double predicted = lin->cost - model_cost(*lin, gn_delta);
            double actual = previous_cost - lin->cost;
            if (actual <= cfg.cost_tolerance * previous_cost &&
                predicted <= cfg.cost_tolerance * lin->cost) {
              return finish(FitStatus::ok);
            }
            Vec3 taken{};
            for (int i = 0; i < 3; ++i) taken[i] = p[i] - previous[i];
            if (norm2(gn_delta) <= cfg.step_tolerance * (norm2(p) + cfg.step_tolerance) &&
                norm2(taken) <= cfg.step_tolerance * (norm2(p) + cfg.step_tolerance) * 1e3) {
              return finish(FitStatus::ok);
            }
          }
          continue;
        }
      }
      damping *= 10.0;
      ++rejections;
      continue;
    }

    // Projected-gradient fallback along the scaled steepest-descent direction.
    Vec3 direction{};
    for (int i = 0; i < 3; ++i) direction[i] = free[i] ? ne.jtr[i] / diag[i] : 0.0;
    bool improved = false;
    double alpha = 1.0;
    for (int attempt = 0; attempt < 60; ++attempt, alpha *= 0.5) {
      Vec3 candidate{};
      for (int i = 0; i < 3; ++i) candidate[i] = p[i] + alpha * direction[i];
      candidate = bounds.project(candidate);
      if (candidate == p) break;
      auto trial_lin = linearize(from_vec(candidate), points);
      if (trial_lin && trial_lin->cost < lin->cost) {
        accept(candidate, std::move(*trial_lin));
        improved = true;
        break;
      }
    }
    if (!improved) return finish(FitStatus::degenerate);
    rejections = 0;
    damping = std::min(damping, 1e6);
  }
}

}  // namespace

void FitConfig::validate() const {
  if (c_min < 3) throw Error(ErrorCode::invalid_argument, "c_min must be at least 3");
  if (max_iterations <= 0) throw Error(ErrorCode::invalid_argument, "max_iterations must be positive");
  if (!(gradient_tolerance > 0.0) || !(step_tolerance > 0.0) || !(cost_tolerance > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "fit tolerances must be positive");
  }
  if (!(initial_damping > 0.0) || !std::isfinite(initial_damping)) {
    throw Error(ErrorCode::invalid_argument, "initial_damping must be positive and finite");
  }
  if (!(infinity_cap > 0.0) || !std::isfinite(infinity_cap)) {
    throw Error(ErrorCode::invalid_argument, "infinity_cap must be positive and finite");
  }
}

std::string_view to_string(FitStatus status) {
  switch (status) {
    case FitStatus::ok: return "ok";
    case FitStatus::max_iterations: return "max_iterations";
    case FitStatus::degenerate: return "degenerate";
  }
  return "unknown";
}

double sum_squared_residuals(const CurveParams& params, std::span<const Point> points) noexcept {
  double cost = 0.0;
  for (const auto& pt : points) {
    auto value = try_evaluate(params, pt.x);
    if (!value) return HUGE_VAL;
    double r = pt.y - *value;
    cost += r * r;
  }
  return std::isfinite(cost) ? cost : HUGE_VAL;
}

FitResult fit(std::span<const Point> points, const ParamBox& box, const FitConfig& cfg,
              const IterateObserver& observer) {
  cfg.validate();
  box.validate();
  if (points.size() < cfg.c_min) {
    throw Error(ErrorCode::too_few_points, "need at least " + std::to_string(cfg.c_min) +
                                               " points, got " + std::to_string(points.size()));
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y)) {
      throw Error(ErrorCode::non_finite_input, "point " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(points[i].x > points[i - 1].x)) {
      throw Error(ErrorCode::non_finite_input,
                  "x must be strictly increasing (point " + std::to_string(i) + ")");
    }
  }

  Bounds bounds{box.lower, box.upper};
  for (int i = 0; i < 3; ++i) {
    bounds.lower[i] = std::max(bounds.lower[i], -cfg.infinity_cap);
    bounds.upper[i] = std::min(bounds.upper[i], cfg.infinity_cap);
  }

  FitResult best = fit_from(box.init, points, bounds, cfg, observer);
  if (!cfg.multi_start) return best;

  std::mt19937_64 rng(cfg.multi_start_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int start = 0; start < 4; ++start) {
    Vec3 jittered{
        bounds.lower[0] + unit(rng) * (std::min(bounds.upper[0], 100.0) - bounds.lower[0]),
        1.0 + unit(rng) * 1.5,
        unit(rng) * std::min(box.init[2], 20.0),
    };
    FitResult candidate = fit_from(jittered, points, bounds, cfg, observer);
    if (candidate.final_cost < best.final_cost) {
      // Report against the canonical start so final_cost <= initial_cost holds.
      candidate.initial_cost = best.initial_cost;
      candidate.iterations += best.iterations;
      best = candidate;
    } else {
      best.iterations += candidate.iterations;
    }
  }
  return best;
}

}  // namespace peng
