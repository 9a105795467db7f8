#include "lcsampler/curve_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

#include "lcsampler/errors.hpp"

namespace lcs {

namespace {

constexpr std::array<std::string_view, 6> kSpecKeys = {"c",      "delta",  "theta1",
                                                       "theta2", "v_star", "num_classes"};

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError("invalid curve spec: " + what);
}

}  // namespace

void validate(const SimCurveSpec& spec) {
  require(spec.num_classes >= 1, "num_classes must be positive");
  require(std::isfinite(spec.c) && spec.c > 0.0 && spec.c < 1.0, "c must lie in (0, 1)");
  require(std::abs(spec.c - 1.0 / static_cast<double>(spec.num_classes)) <= 1e-12,
          "c must equal 1/num_classes");
  require(std::isfinite(spec.delta) && spec.delta > 0.0 && spec.delta < 1.0 - spec.c,
          "delta must lie in (0, 1 - c)");
  require(std::isfinite(spec.theta1) && spec.theta1 < 0.0, "theta1 must be negative");
  require(std::isfinite(spec.theta2) && spec.theta2 > 0.0, "theta2 must be positive");
  require(spec.v_star >= 1, "v_star must be positive");
}

SimCurveSpec make_curve_spec(std::int64_t num_classes, double delta, double theta1,
                             double theta2, std::int64_t v_star) {
  SimCurveSpec spec;
  spec.num_classes = num_classes;
  spec.c = num_classes > 0 ? 1.0 / static_cast<double>(num_classes) : 0.0;
  spec.delta = delta;
  spec.theta1 = theta1;
  spec.theta2 = theta2;
  spec.v_star = v_star;
  validate(spec);
  return spec;
}

RegionBoundaries region_boundaries(const SimCurveSpec& spec) {
  validate(spec);
  // theta2 * v^theta1 = level  <=>  v = (level / theta2)^(1 / theta1)
  const double inv = 1.0 / spec.theta1;
  RegionBoundaries out{std::pow((1.0 - spec.c) / spec.theta2, inv),
                       std::pow(spec.delta / spec.theta2, inv)};
  // delta < 1 - c and theta1 < 0 already imply this; kept for overflow cases.
  require(out.v0 < out.v_omega, "v0 must be below v_omega");
  return out;
}

CurveRegion region_of(const SimCurveSpec& spec, double volume) {
  if (!(volume >= 0.0)) throw InputError("volume must be nonnegative");
  const auto [v0, v_omega] = region_boundaries(spec);
  if (volume <= v0) return CurveRegion::small_data;
  if (volume < v_omega) return CurveRegion::power_law;
  return CurveRegion::irreducible;
}

double power_law_term(const SimCurveSpec& spec, double volume) {
  return spec.theta2 * std::pow(volume, spec.theta1);
}

double mean_loss(const SimCurveSpec& spec, double volume) {
  switch (region_of(spec, volume)) {
    case CurveRegion::small_data:
      return 1.0 - spec.c;
    case CurveRegion::power_law:
      return power_law_term(spec, volume);
    case CurveRegion::irreducible:
      return spec.delta;
  }
  return spec.delta;
}

double bernoulli_mean_std(double p, double volume) {
  if (!(volume > 0.0)) throw InputError("volume must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("success probability outside [0, 1]");
  return std::sqrt(p * (1.0 - p) / volume);
}

SigmaV sigma_v(const SimCurveSpec& spec, double volume) {
  validate(spec);
  if (!(volume > 0.0)) throw InputError("volume must be positive");
  const double alpha = power_law_term(spec, volume);
  const double raw = (1.0 - alpha) + spec.c * alpha;
  SigmaV out;
  out.p = std::clamp(raw, spec.c, 1.0);
  out.p_clamped = out.p != raw;
  out.value = bernoulli_mean_std(out.p, volume);
  return out;
}

ModelVarianceConstants model_variance_constants(const SimCurveSpec& spec) {
  const double alpha_star = power_law_term(spec, static_cast<double>(spec.v_star));
  return {0.0018 * alpha_star, -10.0 * spec.theta1 * alpha_star};
}

double sigma_m(const ModelVarianceConstants& constants, double alpha) {
  return std::sqrt(constants.b * std::pow(alpha, constants.d));
}

double sigma_m(const SimCurveSpec& spec, double volume) {
  validate(spec);
  if (!(volume > 0.0)) throw InputError("volume must be positive");
  return sigma_m(model_variance_constants(spec), power_law_term(spec, volume));
}

double sample_loss(const SimCurveSpec& spec, double volume, RandomStream& rng) {
  const auto region = region_of(spec, volume);
  const auto [z_v, z_m] = rng.normal_pair();
  if (region == CurveRegion::small_data) {
    // Chance-level Bernoulli noise only; volumes below one sample use one.
    const double noise = bernoulli_mean_std(spec.c, std::max(volume, 1.0)) * z_v;
    return std::max(0.0, 1.0 - spec.c + noise);
  }
  const double base = region == CurveRegion::power_law ? power_law_term(spec, volume) : spec.delta;
  const double noise = sigma_v(spec, volume).value * z_v + sigma_m(spec, volume) * z_m;
  return std::max(0.0, base + noise);
}

std::size_t count_crossings(const std::vector<SimCurveSpec>& specs, double lo, double hi,
                            std::size_t grid_points) {
  if (!(lo > 0.0 && hi > lo) || grid_points < 2) throw InputError("bad crossing grid");
  std::vector<std::vector<double>> curves;
  curves.reserve(specs.size());
  const double ratio = std::log(hi / lo) / static_cast<double>(grid_points - 1);
  for (const auto& spec : specs) {
    auto& row = curves.emplace_back();
    row.reserve(grid_points);
    for (std::size_t g = 0; g < grid_points; ++g)
      row.push_back(mean_loss(spec, lo * std::exp(ratio * static_cast<double>(g))));
  }
  std::size_t crossings = 0;
  for (std::size_t a = 0; a < curves.size(); ++a) {
    for (std::size_t b = a + 1; b < curves.size(); ++b) {
      int last_sign = 0;
      for (std::size_t g = 0; g < grid_points; ++g) {
        const double diff = curves[a][g] - curves[b][g];
        const int sign = diff > 0 ? 1 : (diff < 0 ? -1 : 0);
        if (sign == 0) continue;
        if (last_sign != 0 && sign != last_sign) ++crossings;
        last_sign = sign;
      }
    }
  }
  return crossings;
}

nlohmann::json to_json(const SimCurveSpec& spec) {
  return nlohmann::json{{"c", spec.c},           {"delta", spec.delta},
                        {"theta1", spec.theta1}, {"theta2", spec.theta2},
                        {"v_star", spec.v_star}, {"num_classes", spec.num_classes}};
}

SimCurveSpec curve_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("curve spec must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(kSpecKeys.begin(), kSpecKeys.end(), key) == kSpecKeys.end())
      throw SchemaError("unknown curve spec key '" + key + "'");
  }
  for (auto key : kSpecKeys) {
    if (!j.contains(key)) throw SchemaError("missing curve spec key '" + std::string(key) + "'");
  }
  auto number = [&](std::string_view key) {
    const auto& v = j.at(std::string(key));
    if (!v.is_number()) throw SchemaError("curve spec key '" + std::string(key) + "' must be a number");
    return v.get<double>();
  };
  auto integer = [&](std::string_view key) {
    const auto& v = j.at(std::string(key));
    if (!v.is_number_integer())
      throw SchemaError("curve spec key '" + std::string(key) + "' must be an integer");
    return v.get<std::int64_t>();
  };
  SimCurveSpec spec;
  spec.c = number("c");
  spec.delta = number("delta");
  spec.theta1 = number("theta1");
  spec.theta2 = number("theta2");
  spec.v_star = integer("v_star");
  spec.num_classes = integer("num_classes");
  validate(spec);
  return spec;
}

std::vector<SimCurveSpec> curve_specs_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw SchemaError("curve spec file must hold a JSON array");
  std::vector<SimCurveSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      out.push_back(curve_spec_from_json(j[i]));
    } catch (const Error& e) {
      throw SchemaError("spec #" + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace lcs
