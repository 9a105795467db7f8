#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcsampler/rng.hpp"

namespace lcs {

// Parameters of one simulated learning curve. The noiseless curve is
//
//   1 - c             for 0 <= v <= v0
//   theta2 * v^theta1 for v0 < v < v_omega
//   delta             for v_omega <= v
//
// with v0 and v_omega chosen so the pieces join continuously.
struct SimCurveSpec {
  double c = 0.0;
  double delta = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  std::int64_t v_star = 100'000;
  std::int64_t num_classes = 0;

  friend bool operator==(const SimCurveSpec&, const SimCurveSpec&) = default;
};

// Throws DomainError naming the first violated constraint.
void validate(const SimCurveSpec& spec);

// Builds a validated spec with c = 1 / num_classes.
SimCurveSpec make_curve_spec(std::int64_t num_classes, double delta, double theta1,
                             double theta2, std::int64_t v_star = 100'000);

struct RegionBoundaries {
  double v0 = 0.0;
  double v_omega = 0.0;
};

RegionBoundaries region_boundaries(const SimCurveSpec& spec);

enum class CurveRegion { small_data, power_law, irreducible };

CurveRegion region_of(const SimCurveSpec& spec, double volume);

// Power-law portion alpha(v) = theta2 * v^theta1, evaluated everywhere.
double power_law_term(const SimCurveSpec& spec, double volume);

double mean_loss(const SimCurveSpec& spec, double volume);

// Standard deviation of the mean of `volume` Bernoulli(p) draws.
double bernoulli_mean_std(double p, double volume);

struct SigmaV {
  double value = 0.0;
  double p = 0.0;
  // True when the raw p = 1 - alpha + c * alpha fell outside [c, 1] and was
  // clamped; this only happens for volumes inside the small-data region.
  bool p_clamped = false;
};

SigmaV sigma_v(const SimCurveSpec& spec, double volume);

// Power-law model-variance constants, fixed by the calibration volume v*.
struct ModelVarianceConstants {
  double b = 0.0;
  double d = 0.0;
};

ModelVarianceConstants model_variance_constants(const SimCurveSpec& spec);

double sigma_m(const SimCurveSpec& spec, double volume);
double sigma_m(const ModelVarianceConstants& constants, double alpha);

// One stochastic realization of the curve at `volume`. Consumes exactly one
// normal_pair() from the stream. Never negative.
double sample_loss(const SimCurveSpec& spec, double volume, RandomStream& rng);

// Number of sign changes in mean_loss(a) - mean_loss(b) over a geometric grid
// on [lo, hi], summed over all unordered pairs of specs.
std::size_t count_crossings(const std::vector<SimCurveSpec>& specs, double lo, double hi,
                            std::size_t grid_points = 1000);

// JSON with exactly the six snake_case fields; unknown or missing keys throw
// SchemaError, invalid values throw DomainError.
nlohmann::json to_json(const SimCurveSpec& spec);
SimCurveSpec curve_spec_from_json(const nlohmann::json& j);
std::vector<SimCurveSpec> curve_specs_from_json(const nlohmann::json& j);

}  // namespace lcs
