#pragma once

#include <array>
#include <limits>
#include <optional>

namespace peng {

/// Parameters of the saturating accuracy curve f(x) = a - b^(c - x).
///
/// `a` is the asymptote in accuracy percent, `b >= 1` the steepness and
/// `c >= 0` the horizontal shift, both in rescaled-epoch units (the first
/// validation point sits at x = 1).
struct CurveParams {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;

  friend bool operator==(const CurveParams&, const CurveParams&) = default;
};

using Vec3 = std::array<double, 3>;

inline Vec3 to_vec(const CurveParams& p) { return {p.a, p.b, p.c}; }
inline CurveParams from_vec(const Vec3& v) { return {v[0], v[1], v[2]}; }

/// Box constraints and starting point for (a, b, c). Upper bounds may be +inf.
struct ParamBox {
  Vec3 lower;
  Vec3 upper;
  Vec3 init;

  bool contains(const CurveParams& p) const;
  /// Throws Error(invalid_argument) unless lower <= init <= upper componentwise.
  void validate() const;
};

/// Bounds 0.5 <= a <= 102.5, b >= 1, c >= 0 with start (10, 1.001, 100).
ParamBox default_box();

/// a - b^(c - x). Throws Error(evaluation_overflow) when b^(c - x) is not representable.
double evaluate(const CurveParams& params, double x);

/// Non-throwing evaluate: nullopt on overflow.
std::optional<double> try_evaluate(const CurveParams& params, double x) noexcept;

/// (df/da, df/db, df/dc). Throws Error(evaluation_overflow) on a non-finite partial.
Vec3 partials(const CurveParams& params, double x);

std::optional<Vec3> try_partials(const CurveParams& params, double x) noexcept;

}  // namespace peng
