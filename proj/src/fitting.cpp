#include "lcsampler/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lcsampler/errors.hpp"

namespace lcs {

double PowerLaw::operator()(double x) const { return theta2 * std::pow(x, theta1); }

std::string to_string(FitMethod method) {
  switch (method) {
    case FitMethod::two_point:
      return "two_point";
    case FitMethod::nlls:
      return "nlls";
    case FitMethod::single_volume_rank:
      return "single_volume_rank";
  }
  return "unknown";
}

AveragedSample average_samples(std::span<const double> losses, std::int64_t volume) {
  if (losses.empty()) throw InputError("cannot average an empty list of losses");
  if (volume <= 0) throw InputError("volume must be positive");
  double sum = 0.0;
  for (double v : losses) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValueError("loss outside [0, 1]");
    sum += v;
  }
  return {volume, sum / static_cast<double>(losses.size()), static_cast<std::int64_t>(losses.size())};
}

FitResult fit_two_point(const AveragedSample& a, const AveragedSample& b) {
  if (a.volume == b.volume) throw InputError("two-point fit needs distinct volumes");
  if (a.volume <= 0 || b.volume <= 0) throw InputError("volumes must be positive");
  if (!(a.mean_loss > 0.0) || !(b.mean_loss > 0.0))
    throw DomainError("two-point fit needs positive mean losses");
  // Order the points so swapping the inputs gives bit-identical results.
  const auto& lo = a.volume < b.volume ? a : b;
  const auto& hi = a.volume < b.volume ? b : a;
  const double xl = static_cast<double>(lo.volume);
  const double xh = static_cast<double>(hi.volume);
  const double theta1 = std::log(hi.mean_loss / lo.mean_loss) / std::log(xh / xl);
  const double theta2 = lo.mean_loss / std::pow(xl, theta1);

  FitResult fit;
  fit.method = FitMethod::two_point;
  fit.curve = PowerLaw{theta1, theta2};
  fit.converged = true;
  const AveragedSample pts[] = {lo, hi};
  fit.residual = sum_squared_residuals(*fit.curve, pts);
  return fit;
}

double sum_squared_residuals(const PowerLaw& curve, std::span<const AveragedSample> points) {
  double total = 0.0;
  for (const auto& p : points) {
    const double r = curve(static_cast<double>(p.volume)) - p.mean_loss;
    total += r * r;
  }
  return total;
}

PowerLaw loglog_initial_guess(std::span<const AveragedSample> points, double log_floor) {
  const auto n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += std::log(static_cast<double>(p.volume));
    my += std::log(std::max(p.mean_loss, log_floor));
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    const double dx = std::log(static_cast<double>(p.volume)) - mx;
    const double dy = std::log(std::max(p.mean_loss, log_floor)) - my;
    sxx += dx * dx;
    sxy += dx * dy;
  }
  const double slope = sxy / sxx;
  return {slope, std::exp(my - slope * mx)};
}

FitResult fit_power_law_nlls(std::span<const AveragedSample> points, const NllsOptions& options) {
  std::set<std::int64_t> distinct;
  for (const auto& p : points) {
    if (p.volume <= 0) throw InputError("volumes must be positive");
    if (!(p.mean_loss > 0.0)) throw DomainError("power-law fit needs positive mean losses");
    distinct.insert(p.volume);
  }
  if (distinct.size() < 2) throw InputError("power-law fit needs at least two distinct volumes");

  // Solve in s = x / x_ref with log-amplitude phi, so loss = exp(phi) * s^theta1.
  // x_ref is the geometric mean volume; this keeps the normal equations well
  // conditioned and theta2 positive without changing the objective.
  double log_ref = 0.0;
  for (const auto& p : points) log_ref += std::log(static_cast<double>(p.volume));
  log_ref /= static_cast<double>(points.size());
  std::vector<double> log_s;
  for (const auto& p : points) log_s.push_back(std::log(static_cast<double>(p.volume)) - log_ref);

  auto objective = [&](double theta1, double phi) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double r = std::exp(phi + theta1 * log_s[i]) - points[i].mean_loss;
      total += r * r;
    }
    return total;
  };

  const auto init = loglog_initial_guess(points, options.log_floor);
  double theta1 = init.theta1;
  double phi = std::log(init.theta2) + init.theta1 * log_ref;
  double cost = objective(theta1, phi);
  double lambda = options.initial_damping;

  FitResult fit;
  fit.method = FitMethod::nlls;
  int iter = 0;
  while (iter < options.max_iterations && !fit.converged) {
    ++iter;
    if (cost == 0.0) {
      fit.converged = true;
      break;
    }
    // J^T J and J^T r for residuals r_i = f_i - y_i.
    double a11 = 0.0, a12 = 0.0, a22 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double f = std::exp(phi + theta1 * log_s[i]);
      const double r = f - points[i].mean_loss;
      const double j1 = f * log_s[i];
      const double j2 = f;
      a11 += j1 * j1;
      a12 += j1 * j2;
      a22 += j2 * j2;
      g1 += j1 * r;
      g2 += j2 * r;
    }
    bool accepted = false;
    while (!accepted) {
      const double d11 = a11 * (1.0 + lambda);
      const double d22 = a22 * (1.0 + lambda);
      const double det = d11 * d22 - a12 * a12;
      if (!(det > 0.0) || !std::isfinite(det)) {
        lambda *= options.damping_factor;
        if (lambda > 1e16) break;
        continue;
      }
      const double step1 = -(d22 * g1 - a12 * g2) / det;
      const double step2 = -(d11 * g2 - a12 * g1) / det;
      const double trial_cost = objective(theta1 + step1, phi + step2);
      const double step_norm = std::hypot(step1, step2);
      const double param_norm = std::hypot(theta1, phi);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double rel_change = (cost - trial_cost) / cost;
        theta1 += step1;
        phi += step2;
        cost = trial_cost;
        lambda /= options.damping_factor;
        accepted = true;
        if (rel_change < options.residual_rtol ||
            step_norm < options.step_tol * (1.0 + param_norm))
          fit.converged = true;
      } else {
        lambda *= options.damping_factor;
        // The damped step has shrunk to nothing: we sit at a minimum.
        if (step_norm < options.step_tol * (1.0 + param_norm)) {
          fit.converged = true;
          break;
        }
        if (lambda > 1e16) break;
      }
    }
    if (!accepted && !fit.converged) break;
  }
  fit.iterations = iter;
  fit.curve = PowerLaw{theta1, std::exp(phi - theta1 * log_ref)};
  fit.residual = cost;
  return fit;
}

double predict(const FitResult& fit, std::int64_t volume) {
  if (!fit.curve) throw UnsupportedMethodError("fit method " + to_string(fit.method) + " has no curve");
  if (volume <= 0) throw InputError("volume must be positive");
  return std::max(0.0, (*fit.curve)(static_cast<double>(volume)));
}

std::vector<std::string> rank_single_volume(const std::map<std::string, AveragedSample>& per_model) {
  std::vector<std::pair<double, std::string>> order;
  std::optional<std::int64_t> volume;
  for (const auto& [id, sample] : per_model) {
    if (volume && *volume != sample.volume) throw InputError("single-volume ranking got mixed volumes");
    volume = sample.volume;
    order.emplace_back(sample.mean_loss, id);
  }
  std::sort(order.begin(), order.end());
  std::vector<std::string> out;
  for (auto& [loss, id] : order) out.push_back(std::move(id));
  return out;
}

nlohmann::json to_json(const FitResult& fit) {
  nlohmann::json j{{"method", to_string(fit.method)},
                   {"converged", fit.converged},
                   {"iterations", fit.iterations},
                   {"residual", fit.residual}};
  if (fit.curve) {
    j["theta1"] = fit.curve->theta1;
    j["theta2"] = fit.curve->theta2;
  } else {
    j["theta1"] = nullptr;
    j["theta2"] = nullptr;
  }
  return j;
}

}  // namespace lcs
