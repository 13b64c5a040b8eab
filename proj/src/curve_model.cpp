#include "peng/curve_model.hpp"

#include <cmath>
#include <string>

#include "peng/error.hpp"
#include "peng/format.hpp"

namespace peng {
namespace {

// exp(-700) is ~1e-304: clamping below it changes a residual by far less than
// 1e-9, while exp(+700) is already at the edge of double range.
constexpr double kExponentClamp = 700.0;

// b^(c - x) computed as exp((c - x) ln b); nullopt when it would overflow.
std::optional<double> power_term(double b, double c, double x) noexcept {
  if (b == 1.0) return 1.0;
  if (!(b > 0.0) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(x)) {
    return std::nullopt;
  }
  double exponent = (c - x) * std::log(b);
  if (exponent > kExponentClamp) return std::nullopt;
  if (exponent < -kExponentClamp) exponent = -kExponentClamp;
  return std::exp(exponent);
}

}  // namespace

bool ParamBox::contains(const CurveParams& p) const {
  auto v = to_vec(p);
  for (int i = 0; i < 3; ++i) {
    if (!(v[i] >= lower[i] && v[i] <= upper[i])) return false;
  }
  return true;
}

void ParamBox::validate() const {
  static constexpr const char* names[] = {"a", "b", "c"};
  for (int i = 0; i < 3; ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i]) || !std::isfinite(init[i]) ||
        lower[i] > init[i] || init[i] > upper[i]) {
      throw Error(ErrorCode::invalid_argument,
                  std::string("parameter box for ") + names[i] + " must satisfy lower <= init <= upper (" +
                      format_double(lower[i]) + ", " + format_double(init[i]) + ", " +
                      format_double(upper[i]) + ")");
    }
  }
  if (lower[1] <= 0.0) {
    throw Error(ErrorCode::invalid_argument, "lower bound on b must be positive");
  }
}

ParamBox default_box() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return ParamBox{
      .lower = {0.5, 1.0, 0.0},
      .upper = {102.5, inf, inf},
      .init = {10.0, 1.001, 100.0},
  };
}

std::optional<double> try_evaluate(const CurveParams& params, double x) noexcept {
  if (params.b == 1.0) return params.a - 1.0;
  auto term = power_term(params.b, params.c, x);
  if (!term) return std::nullopt;
  double value = params.a - *term;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

double evaluate(const CurveParams& params, double x) {
  auto value = try_evaluate(params, x);
  if (!value) {
    throw Error(ErrorCode::evaluation_overflow,
                "b^(c-x) overflows at a=" + format_double(params.a) + " b=" +
                    format_double(params.b) + " c=" + format_double(params.c) +
                    " x=" + format_double(x));
  }
  return *value;
}

std::optional<Vec3> try_partials(const CurveParams& params, double x) noexcept {
  auto term = power_term(params.b, params.c, x);
  if (!term) return std::nullopt;
  // d/db b^(c-x) = (c-x) b^(c-x-1) = (c-x) b^(c-x) / b
  Vec3 grad{1.0, -(params.c - x) * *term / params.b, -std::log(params.b) * *term};
  for (double g : grad) {
    if (!std::isfinite(g)) return std::nullopt;
  }
  return grad;
}

Vec3 partials(const CurveParams& params, double x) {
  auto grad = try_partials(params, x);
  if (!grad) {
    throw Error(ErrorCode::evaluation_overflow,
                "partial derivatives overflow at b=" + format_double(params.b) +
                    " c=" + format_double(params.c) + " x=" + format_double(x));
  }
  return *grad;
}

}  // namespace peng
