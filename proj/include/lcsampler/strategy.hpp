#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcsampler/fitting.hpp"
#include "lcsampler/pool.hpp"
#include "lcsampler/rng.hpp"

namespace lcs {

enum class PlanKind { single_volume, two_volume, multi_volume };

std::string to_string(PlanKind kind);
PlanKind plan_kind_from_string(const std::string& name);
PlanKind plan_kind_for(std::size_t volume_count);

// Uniform allocation: every model is sampled `repeats` times on every chosen
// volume and never elsewhere.
struct SamplingPlan {
  std::vector<double> volume_fractions;
  std::int64_t repeats = 1;
  PlanKind kind = PlanKind::single_volume;

  // repeats * sum(volume_fractions), in units of C_N.
  [[nodiscard]] double budget_fraction() const;

  friend bool operator==(const SamplingPlan&, const SamplingPlan&) = default;
};

// Throws InputError when fractions are unsorted, outside (0,1) or the kind
// does not match their count.
void validate(const SamplingPlan& plan);

// Largest repeats b with b * sum(fractions) <= budget_fraction.
SamplingPlan plan_from_budget(const std::vector<double>& volume_fractions, double budget_fraction);

// Plan JSON: {"kind", "volume_fractions", "budget_fraction"} or with
// "repeats" in place of "budget_fraction". "kind" is optional.
SamplingPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SamplingPlan& plan);

struct ExecuteOptions {
  // Require every f * x_N to be a recorded pool volume.
  bool exact_volumes = false;
  NllsOptions nlls;
};

// Volumes of `pool` the plan samples on, in plan order.
std::vector<std::int64_t> resolve_volumes(const PerformancePool& pool, const SamplingPlan& plan,
                                          const ExecuteOptions& options = {});

// gamma-units: m * repeats * sum(x_i) over the resolved volumes.
std::int64_t sampling_cost(const PerformancePool& pool, const SamplingPlan& plan,
                           const ExecuteOptions& options = {});

// Full ordering of all models for one trial, best first. `scores` holds the
// predicted target loss (or the single-volume mean loss).
struct ModelRanking {
  std::vector<std::string> order;
  std::map<std::string, double> scores;
  std::map<std::string, FitResult> fits;
  // Per model, one averaged sample per plan volume.
  std::map<std::string, std::vector<AveragedSample>> samples;
  std::int64_t sampling_cost = 0;
};

// Draws, fits and orders every model. Model j draws from rng.child(j).
// Non-converged NLLS fits are placed after every converged model.
ModelRanking rank_models(const PerformancePool& pool, const SamplingPlan& plan,
                         const RandomStream& rng, const ExecuteOptions& options = {});

struct SelectionResult {
  std::vector<std::string> selected;
  std::map<std::string, double> predictions;
  std::int64_t sampling_cost = 0;
};

SelectionResult select_top(const ModelRanking& ranking, std::size_t k);

SelectionResult execute(const PerformancePool& pool, const SamplingPlan& plan, std::size_t k,
                        const RandomStream& rng, const ExecuteOptions& options = {});

}  // namespace lcs
