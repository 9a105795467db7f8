#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lcsampler/errors.hpp"
#include "lcsampler/fitting.hpp"
#include "oracles.hpp"

using namespace lcs;

namespace {

std::vector<AveragedSample> from_curve(double theta1, double theta2, std::vector<std::int64_t> volumes) {
  std::vector<AveragedSample> out;
  for (auto v : volumes) out.push_back({v, theta2 * std::pow(static_cast<double>(v), theta1), 1});
  return out;
}

std::vector<oracle::Point> to_points(const std::vector<AveragedSample>& samples) {
  std::vector<oracle::Point> out;
  for (const auto& s : samples) out.push_back({static_cast<double>(s.volume), s.mean_loss});
  return out;
}

}  // namespace

TEST_CASE("average_samples") {
  const double one[] = {0.5};
  const auto a = average_samples(one, 100);
  CHECK(a.volume == 100);
  CHECK(a.mean_loss == 0.5);
  CHECK(a.count == 1);

  const double three[] = {0.2, 0.4, 0.6};
  CHECK(average_samples(three, 10).mean_loss == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(average_samples(three, 10).count == 3);
  const double shuffled[] = {0.6, 0.2, 0.4};
  CHECK(average_samples(shuffled, 10).mean_loss == doctest::Approx(average_samples(three, 10).mean_loss).epsilon(1e-15));

  CHECK_THROWS_AS(average_samples(std::span<const double>{}, 10), InputError);
  const double bad[] = {1.5};
  CHECK_THROWS_AS(average_samples(bad, 10), ValueError);
}

TEST_CASE("two-point solve") {
  const auto fit = fit_two_point({1, 2.0, 1}, {4, 1.0, 1});
  REQUIRE(fit.curve);
  CHECK(fit.method == FitMethod::two_point);
  CHECK(fit.curve->theta1 == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(fit.curve->theta2 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK((*fit.curve)(4.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.converged);

  const auto flat = fit_two_point({100, 0.3, 1}, {700, 0.3, 1});
  CHECK(flat.curve->theta1 == 0.0);
  CHECK(flat.curve->theta2 == doctest::Approx(0.3).epsilon(1e-15));

  const auto ab = fit_two_point({1000, 0.4, 2}, {14000, 0.21, 2});
  const auto ba = fit_two_point({14000, 0.21, 2}, {1000, 0.4, 2});
  CHECK(ab.curve->theta1 == ba.curve->theta1);
  CHECK(ab.curve->theta2 == ba.curve->theta2);

  const auto [t1, t2] = oracle::two_point({1000, 0.4}, {14000, 0.21});
  CHECK(ab.curve->theta1 == doctest::Approx(t1).epsilon(1e-12));
  CHECK(ab.curve->theta2 == doctest::Approx(t2).epsilon(1e-12));

  CHECK_THROWS_AS(fit_two_point({10, 0.3, 1}, {10, 0.2, 1}), InputError);
  CHECK_THROWS_AS(fit_two_point({10, 0.0, 1}, {20, 0.2, 1}), DomainError);
}

TEST_CASE("two-point curve interpolates both inputs") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> loss(0.01, 1.0);
  std::uniform_int_distribution<std::int64_t> vol(1, 100000);
  for (int i = 0; i < 500; ++i) {
    AveragedSample a{vol(gen), loss(gen), 1}, b{vol(gen), loss(gen), 1};
    // Nearly equal volumes give slopes whose coefficient overflows a double.
    const auto ratio = static_cast<double>(std::max(a.volume, b.volume)) / static_cast<double>(std::min(a.volume, b.volume));
    if (ratio < 1.5) continue;
    const auto fit = fit_two_point(a, b);
    CHECK(std::abs(predict(fit, a.volume) - a.mean_loss) <= 1e-12 * a.mean_loss);
    CHECK(std::abs(predict(fit, b.volume) - b.mean_loss) <= 1e-12 * b.mean_loss);
  }
}

TEST_CASE("NLLS recovers a noiseless power law") {
  const auto pts = from_curve(-0.3, 4.0, {1000, 2000, 4000, 8000});
  const auto fit = fit_power_law_nlls(pts);
  REQUIRE(fit.curve);
  CHECK(fit.converged);
  CHECK(fit.method == FitMethod::nlls);
  CHECK(std::abs(fit.curve->theta1 / -0.3 - 1.0) < 1e-6);
  CHECK(std::abs(fit.curve->theta2 / 4.0 - 1.0) < 1e-6);
  CHECK(fit.residual <= oracle::best_grid_residual(to_points(pts)));
}

TEST_CASE("NLLS on two points matches the two-point solve") {
  const AveragedSample a{1000, 0.42, 3}, b{9000, 0.17, 3};
  const AveragedSample pts[] = {a, b};
  const auto nlls = fit_power_law_nlls(pts);
  const auto exact = fit_two_point(a, b);
  CHECK(std::abs(nlls.curve->theta1 - exact.curve->theta1) < 1e-9);
  CHECK(std::abs(nlls.curve->theta2 - exact.curve->theta2) < 1e-9 * exact.curve->theta2);
}

TEST_CASE("NLLS on flat data") {
  const std::vector<AveragedSample> pts = {{100, 0.25, 1}, {200, 0.25, 1}, {400, 0.25, 1}, {800, 0.25, 1}};
  const auto fit = fit_power_law_nlls(pts);
  CHECK(std::abs(fit.curve->theta1) < 1e-9);
  CHECK(fit.curve->theta2 == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("NLLS never ends above its log-log starting point and beats a brute-force grid") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> slope(-0.9, -0.1), amp(0.5, 4.5), noise(-0.15, 0.15);
  std::uniform_int_distribution<int> count(2, 4);
  for (int trial = 0; trial < 60; ++trial) {
    const double t1 = slope(gen), t2 = amp(gen);
    std::vector<AveragedSample> pts;
    const int n = count(gen);
    for (int i = 0; i < n; ++i) {
      const double x = 10.0 * std::pow(2.0, i);
      pts.push_back({static_cast<std::int64_t>(x), t2 * std::pow(x, t1) * (1.0 + noise(gen)), 1});
    }
    const auto fit = fit_power_law_nlls(pts);
    const auto init = loglog_initial_guess(pts);
    CHECK(fit.residual <= sum_squared_residuals(init, pts) + 1e-30);
    CHECK(fit.residual == doctest::Approx(sum_squared_residuals(*fit.curve, pts)).epsilon(1e-9));
    CHECK(fit.residual <= oracle::best_grid_residual(to_points(pts)) + 1e-15);
    CHECK(fit.curve->theta2 > 0.0);
  }
}

TEST_CASE("NLLS is scale-consistent in volume") {
  const auto base = from_curve(-0.45, 3.0, {10, 30, 90, 270});
  const auto fit = fit_power_law_nlls(base);
  for (std::int64_t k : {3, 100}) {
    auto scaled = base;
    for (auto& p : scaled) p.volume *= k;
    const auto sfit = fit_power_law_nlls(scaled);
    CHECK(std::abs(sfit.curve->theta1 - fit.curve->theta1) < 1e-6);
    CHECK(sfit.curve->theta2 ==
          doctest::Approx(fit.curve->theta2 * std::pow(static_cast<double>(k), -fit.curve->theta1)).epsilon(1e-6));
  }
}

TEST_CASE("NLLS domain handling") {
  const std::vector<AveragedSample> zero = {{100, 0.0, 1}, {200, 0.2, 1}};
  CHECK_THROWS_AS(fit_power_law_nlls(zero), DomainError);
  const std::vector<AveragedSample> same = {{100, 0.3, 1}, {100, 0.2, 1}};
  CHECK_THROWS_AS(fit_power_law_nlls(same), InputError);

  // A floored initial guess still starts from a defined point.
  const auto guess = loglog_initial_guess(std::vector<AveragedSample>{{100, 0.0, 1}, {200, 0.2, 1}});
  CHECK(std::isfinite(guess.theta1));

  NllsOptions capped;
  capped.max_iterations = 0;
  const auto fit = fit_power_law_nlls(from_curve(-0.3, 4.0, {10, 20, 40}), capped);
  CHECK_FALSE(fit.converged);
  CHECK(fit.iterations == 0);
}

TEST_CASE("predict") {
  FitResult fit;
  fit.method = FitMethod::two_point;
  fit.curve = PowerLaw{-0.5, 2.0};
  CHECK(predict(fit, 4) == 1.0);
  fit.curve = PowerLaw{0.0, 0.7};
  CHECK(predict(fit, 1) == 0.7);
  CHECK(predict(fit, 123456) == 0.7);

  FitResult rank;
  rank.method = FitMethod::single_volume_rank;
  CHECK_THROWS_AS(predict(rank, 10), UnsupportedMethodError);
  CHECK(to_json(rank)["theta1"].is_null());
  CHECK(to_json(fit)["method"] == "two_point");
}

TEST_CASE("rank_single_volume") {
  CHECK(rank_single_volume({{"A", {10, 0.3, 1}}, {"B", {10, 0.2, 1}}, {"C", {10, 0.5, 1}}}) ==
        std::vector<std::string>{"B", "A", "C"});
  CHECK(rank_single_volume({{"only", {10, 0.3, 1}}}) == std::vector<std::string>{"only"});
  CHECK(rank_single_volume({{"B", {10, 0.3, 1}}, {"A", {10, 0.3, 1}}}) == std::vector<std::string>{"A", "B"});
  CHECK_THROWS_AS(rank_single_volume({{"A", {10, 0.3, 1}}, {"B", {20, 0.2, 1}}}), InputError);
}

TEST_CASE("rank_single_volume is invariant under increasing transforms") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> loss(0.01, 0.99);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<std::string, AveragedSample> raw, transformed;
    for (int i = 0; i < 8; ++i) {
      const auto id = "m" + std::to_string(i);
      const double y = std::round(loss(gen) * 20) / 20;  // coarse grid forces ties
      raw[id] = {50, y, 1};
      transformed[id] = {50, std::sqrt(y) * 0.5 + 0.1, 1};
    }
    CHECK(rank_single_volume(raw) == rank_single_volume(transformed));
  }
}
