#include "lcsampler/bundled_specs.hpp"

#include <array>
#include <cmath>

namespace lcs {

namespace {

struct Curve {
  double theta1;
  double power_law_loss_at_target;  // theta2 * v*^theta1, before the floor
  double delta;
};

constexpr std::array<Curve, 12> kCurves = {{
    {-0.2, 0.100, 0.02},
    {-0.2, 0.115, 0.02},
    {-0.2, 0.130, 0.02},
    {-0.2, 0.145, 0.02},
    {-0.4, 0.075, 0.02},
    {-0.4, 0.090, 0.10},
    {-0.4, 0.105, 0.02},
    {-0.4, 0.120, 0.02},
    {-0.7, 0.045, 0.10},
    {-0.7, 0.060, 0.02},
    {-0.7, 0.075, 0.12},
    {-0.7, 0.090, 0.02},
}};

}  // namespace

std::vector<SimCurveSpec> default_curve_specs() {
  const double target = static_cast<double>(kDefaultTargetVolume);
  std::vector<SimCurveSpec> out;
  for (const auto& curve : kCurves) {
    const double theta2 = curve.power_law_loss_at_target / std::pow(target, curve.theta1);
    out.push_back(make_curve_spec(kDefaultClasses, curve.delta, curve.theta1, theta2, kDefaultTargetVolume));
  }
  return out;
}

std::vector<std::int64_t> default_volumes(std::int64_t target_volume) {
  std::vector<std::int64_t> out;
  for (std::int64_t pct = 1; pct <= 16; ++pct) out.push_back(target_volume * pct / 100);
  return out;
}

}  // namespace lcs
