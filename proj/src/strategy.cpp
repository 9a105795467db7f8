#include "lcsampler/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lcsampler/errors.hpp"
#include "lcsampler/format.hpp"

namespace lcs {

namespace {

// Budget arithmetic works on decimal fractions like 0.01 + 0.14; allow for
// the representation error of such sums.
constexpr double kBudgetSlack = 1e-9;

double fraction_sum(const std::vector<double>& fractions) {
  return std::accumulate(fractions.begin(), fractions.end(), 0.0);
}

}  // namespace

std::string to_string(PlanKind kind) {
  switch (kind) {
    case PlanKind::single_volume:
      return "single_volume";
    case PlanKind::two_volume:
      return "two_volume";
    case PlanKind::multi_volume:
      return "multi_volume";
  }
  return "unknown";
}

PlanKind plan_kind_from_string(const std::string& name) {
  if (name == "single_volume" || name == "single") return PlanKind::single_volume;
  if (name == "two_volume" || name == "two") return PlanKind::two_volume;
  if (name == "multi_volume" || name == "multi") return PlanKind::multi_volume;
  throw InputError("unknown plan kind '" + name + "'");
}

PlanKind plan_kind_for(std::size_t volume_count) {
  if (volume_count == 0) throw InputError("plan needs at least one volume");
  if (volume_count == 1) return PlanKind::single_volume;
  if (volume_count == 2) return PlanKind::two_volume;
  return PlanKind::multi_volume;
}

double SamplingPlan::budget_fraction() const {
  return static_cast<double>(repeats) * fraction_sum(volume_fractions);
}

void validate(const SamplingPlan& plan) {
  if (plan.volume_fractions.empty()) throw InputError("plan needs at least one volume fraction");
  for (std::size_t i = 0; i < plan.volume_fractions.size(); ++i) {
    const double f = plan.volume_fractions[i];
    if (!(f > 0.0 && f < 1.0)) throw InputError("volume fraction " + format_double(f) + " outside (0, 1)");
    if (i > 0 && !(f > plan.volume_fractions[i - 1]))
      throw InputError("volume fractions must be strictly increasing");
  }
  if (plan.repeats < 1) throw InputError("plan repeats must be positive");
  if (plan.kind != plan_kind_for(plan.volume_fractions.size()))
    throw InputError("plan kind " + to_string(plan.kind) + " does not match " +
                     std::to_string(plan.volume_fractions.size()) + " volume(s)");
}

SamplingPlan plan_from_budget(const std::vector<double>& volume_fractions, double budget_fraction) {
  if (!(budget_fraction > 0.0 && budget_fraction <= 1.0))
    throw InputError("budget fraction must lie in (0, 1]");
  SamplingPlan plan{volume_fractions, 1, plan_kind_for(volume_fractions.size())};
  validate(plan);
  const double per_repeat = fraction_sum(volume_fractions);
  const auto repeats = static_cast<std::int64_t>(std::floor(budget_fraction / per_repeat + kBudgetSlack));
  if (repeats < 1)
    throw InfeasibleBudgetError("budget " + format_double(budget_fraction) +
                                " is below one repetition of the plan (" + format_double(per_repeat) + ")");
  plan.repeats = repeats;
  return plan;
}

SamplingPlan plan_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("plan must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "kind" && key != "volume_fractions" && key != "budget_fraction" && key != "repeats")
      throw SchemaError("unknown plan key '" + key + "'");
  }
  if (!j.contains("volume_fractions") || !j["volume_fractions"].is_array())
    throw SchemaError("plan needs a 'volume_fractions' array");
  std::vector<double> fractions;
  for (const auto& f : j["volume_fractions"]) {
    if (!f.is_number()) throw SchemaError("volume fractions must be numbers");
    fractions.push_back(f.get<double>());
  }
  const bool has_budget = j.contains("budget_fraction");
  const bool has_repeats = j.contains("repeats");
  if (has_budget == has_repeats) throw SchemaError("plan needs exactly one of 'budget_fraction' or 'repeats'");
  SamplingPlan plan;
  if (has_budget) {
    if (!j["budget_fraction"].is_number()) throw SchemaError("'budget_fraction' must be a number");
    plan = plan_from_budget(fractions, j["budget_fraction"].get<double>());
  } else {
    if (!j["repeats"].is_number_integer()) throw SchemaError("'repeats' must be an integer");
    plan = SamplingPlan{fractions, j["repeats"].get<std::int64_t>(), plan_kind_for(fractions.size())};
  }
  if (j.contains("kind")) {
    if (!j["kind"].is_string()) throw SchemaError("'kind' must be a string");
    plan.kind = plan_kind_from_string(j["kind"].get<std::string>());
  }
  validate(plan);
  return plan;
}

nlohmann::json to_json(const SamplingPlan& plan) {
  return {{"kind", to_string(plan.kind)},
          {"volume_fractions", plan.volume_fractions},
          {"repeats", plan.repeats},
          {"budget_fraction", plan.budget_fraction()}};
}

std::vector<std::int64_t> resolve_volumes(const PerformancePool& pool, const SamplingPlan& plan,
                                          const ExecuteOptions& options) {
  validate(plan);
  const auto& available = pool.volumes();
  if (available.empty()) throw LookupError("pool has no volumes below the target volume");
  std::vector<std::int64_t> out;
  for (double f : plan.volume_fractions) {
    const auto wanted = static_cast<std::int64_t>(std::llround(f * static_cast<double>(pool.target_volume())));
    // Nearest recorded volume; ties go to the smaller one.
    auto it = std::lower_bound(available.begin(), available.end(), wanted);
    std::int64_t best;
    if (it == available.end()) {
      best = available.back();
    } else if (it == available.begin()) {
      best = *it;
    } else {
      const auto above = *it;
      const auto below = *std::prev(it);
      best = (above - wanted) < (wanted - below) ? above : below;
    }
    if (options.exact_volumes && best != wanted)
      throw LookupError("pool has no volume " + std::to_string(wanted) + " (fraction " + format_double(f) + ")");
    if (!out.empty() && best == out.back())
      throw LookupError("fractions " + format_double(f) + " and its predecessor resolve to the same pool volume " +
                        std::to_string(best));
    out.push_back(best);
  }
  return out;
}

std::int64_t sampling_cost(const PerformancePool& pool, const SamplingPlan& plan,
                           const ExecuteOptions& options) {
  const auto volumes = resolve_volumes(pool, plan, options);
  const auto per_model = std::accumulate(volumes.begin(), volumes.end(), std::int64_t{0});
  return static_cast<std::int64_t>(pool.model_count()) * plan.repeats * per_model;
}

ModelRanking rank_models(const PerformancePool& pool, const SamplingPlan& plan,
                         const RandomStream& rng, const ExecuteOptions& options) {
  const auto volumes = resolve_volumes(pool, plan, options);
  ModelRanking ranking;
  ranking.sampling_cost = sampling_cost(pool, plan, options);

  std::map<std::string, AveragedSample> single;
  // (demoted, score, id) sorts converged fits first, then by prediction, then id.
  std::vector<std::tuple<bool, double, std::string>> keyed;
  const auto& models = pool.models();
  for (std::size_t j = 0; j < models.size(); ++j) {
    auto stream = rng.child(j);
    std::vector<AveragedSample> samples;
    for (auto v : volumes) {
      const auto losses = draw(pool, models[j], v, plan.repeats, stream);
      samples.push_back(average_samples(losses, v));
    }
    ranking.samples[models[j]] = samples;
    switch (plan.kind) {
      case PlanKind::single_volume:
        single.emplace(models[j], samples.front());
        ranking.scores[models[j]] = samples.front().mean_loss;
        break;
      case PlanKind::two_volume: {
        auto fit = fit_two_point(samples[0], samples[1]);
        const double score = predict(fit, pool.target_volume());
        ranking.scores[models[j]] = score;
        keyed.emplace_back(!std::isfinite(score), score, models[j]);
        ranking.fits.emplace(models[j], std::move(fit));
        break;
      }
      case PlanKind::multi_volume: {
        auto fit = fit_power_law_nlls(samples, options.nlls);
        const double score = predict(fit, pool.target_volume());
        ranking.scores[models[j]] = score;
        keyed.emplace_back(!fit.converged || !std::isfinite(score), score, models[j]);
        ranking.fits.emplace(models[j], std::move(fit));
        break;
      }
    }
  }
  if (plan.kind == PlanKind::single_volume) {
    ranking.order = rank_single_volume(single);
  } else {
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return !std::get<0>(a);
      // NaN scores only occur among demoted models; order those by id.
      const double sa = std::get<1>(a), sb = std::get<1>(b);
      if (std::isfinite(sa) && std::isfinite(sb) && sa != sb) return sa < sb;
      if (std::isfinite(sa) != std::isfinite(sb)) return std::isfinite(sa);
      return std::get<2>(a) < std::get<2>(b);
    });
    for (auto& entry : keyed) ranking.order.push_back(std::move(std::get<2>(entry)));
  }
  return ranking;
}

SelectionResult select_top(const ModelRanking& ranking, std::size_t k) {
  if (k < 1) throw InputError("k must be positive");
  if (k > ranking.order.size())
    throw InputError("k = " + std::to_string(k) + " exceeds the number of models m = " +
                     std::to_string(ranking.order.size()));
  SelectionResult out;
  out.selected.assign(ranking.order.begin(), ranking.order.begin() + static_cast<std::ptrdiff_t>(k));
  out.predictions = ranking.scores;
  out.sampling_cost = ranking.sampling_cost;
  return out;
}

SelectionResult execute(const PerformancePool& pool, const SamplingPlan& plan, std::size_t k,
                        const RandomStream& rng, const ExecuteOptions& options) {
  if (k > pool.model_count())
    throw InputError("k = " + std::to_string(k) + " exceeds the number of models m = " +
                     std::to_string(pool.model_count()));
  return select_top(rank_models(pool, plan, rng, options), k);
}

}  // namespace lcs
