#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace lcs {

// Mean of l repeated outcomes at one volume.
struct AveragedSample {
  std::int64_t volume = 0;
  double mean_loss = 0.0;
  std::int64_t count = 0;
};

AveragedSample average_samples(std::span<const double> losses, std::int64_t volume);

enum class FitMethod { two_point, nlls, single_volume_rank };

std::string to_string(FitMethod method);

// Power law loss(x) = theta2 * x^theta1.
struct PowerLaw {
  double theta1 = 0.0;
  double theta2 = 0.0;

  [[nodiscard]] double operator()(double x) const;
};

struct FitResult {
  FitMethod method = FitMethod::two_point;
  // Empty for single_volume_rank.
  std::optional<PowerLaw> curve;
  bool converged = false;
  int iterations = 0;
  // Sum of squared residuals on the original (non-log) scale.
  double residual = 0.0;
};

FitResult fit_two_point(const AveragedSample& a, const AveragedSample& b);

struct NllsOptions {
  int max_iterations = 200;
  double residual_rtol = 1e-12;
  double step_tol = 1e-10;
  double initial_damping = 1e-3;
  double damping_factor = 10.0;
  // Floor applied to losses before taking logs for the initial line fit.
  double log_floor = 1e-6;
};

// Levenberg-Marquardt fit of theta2 * x^theta1 to the averaged points,
// started from a least-squares line through (ln x, ln y).
FitResult fit_power_law_nlls(std::span<const AveragedSample> points, const NllsOptions& options = {});

// Sum of squared residuals of `curve` on `points`.
double sum_squared_residuals(const PowerLaw& curve, std::span<const AveragedSample> points);

// Log-log least-squares line used to seed the NLLS solver.
PowerLaw loglog_initial_guess(std::span<const AveragedSample> points, double log_floor = 1e-6);

double predict(const FitResult& fit, std::int64_t volume);

// Ascending by mean loss, ties by model_id. All samples must share a volume.
std::vector<std::string> rank_single_volume(const std::map<std::string, AveragedSample>& per_model);

nlohmann::json to_json(const FitResult& fit);

}  // namespace lcs
