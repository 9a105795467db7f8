#pragma once

#include <cstdint>
#include <vector>

#include "lcsampler/curve_model.hpp"

namespace lcs {

inline constexpr std::int64_t kDefaultTargetVolume = 100'000;
inline constexpr std::int64_t kDefaultClasses = 20;
inline constexpr std::int64_t kDefaultRepeats = 5;

// Twelve curves in three slope families (theta1 = -0.2, -0.4, -0.7), four per
// family. Steeper families start worse and finish better, so most rankings
// flip somewhere between 1% and the full target. The steepest curves sit at
// chance level around 1%, and three curves level off at a floor before
// reaching the target.
std::vector<SimCurveSpec> default_curve_specs();

// 1%, 2%, ..., 16% of the target volume.
std::vector<std::int64_t> default_volumes(std::int64_t target_volume = kDefaultTargetVolume);

}  // namespace lcs
