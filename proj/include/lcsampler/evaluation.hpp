#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcsampler/pool.hpp"
#include "lcsampler/strategy.hpp"

namespace lcs {

// x = C_s / C_N + k / m with C_N = m * x_N (gamma cancels).
double cost_multiplier(double sampling_cost, std::int64_t k, std::int64_t m, std::int64_t target_volume);

// y = L_found / L*, where L_found is the best target loss among `selected`
// and L* the best over all models.
double loss_multiplier(const std::vector<std::string>& selected, const PerformancePool& pool);

struct TrialOutcome {
  std::int64_t k = 0;
  double sampling_cost_fraction = 0.0;
  double training_cost_fraction = 0.0;
  double x_multiplier = 0.0;
  double y_multiplier = 1.0;
  std::vector<std::string> selected;
};

struct FrontierPoint {
  std::int64_t k = 0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double std_y = 0.0;
  std::int64_t trial_count = 0;

  friend bool operator==(const FrontierPoint&, const FrontierPoint&) = default;
};

struct FrontierSeries {
  std::string label;
  std::vector<FrontierPoint> points;

  friend bool operator==(const FrontierSeries&, const FrontierSeries&) = default;
};

struct TrialOptions {
  std::int64_t trials = 30;
  std::uint64_t master_seed = 0;
  // Worker threads; 0 picks hardware concurrency. Results do not depend on it.
  unsigned threads = 1;
  ExecuteOptions execute;
};

// Outcomes of trial `trial_index` for every k. The trial's stream is
// RandomStream(master_seed).child(trial_index); one ranking serves all k.
std::vector<TrialOutcome> run_single_trial(const PerformancePool& pool, const SamplingPlan& plan,
                                           const std::vector<std::int64_t>& k_values,
                                           std::uint64_t master_seed, std::int64_t trial_index,
                                           const ExecuteOptions& options = {});

// outcomes[trial][k index].
std::vector<std::vector<TrialOutcome>> run_trial_outcomes(const PerformancePool& pool,
                                                          const SamplingPlan& plan,
                                                          const std::vector<std::int64_t>& k_values,
                                                          const TrialOptions& options);

FrontierSeries aggregate(const std::string& label, const std::vector<std::int64_t>& k_values,
                         const std::vector<std::vector<TrialOutcome>>& outcomes);

FrontierSeries run_trials(const PerformancePool& pool, const SamplingPlan& plan,
                          const std::vector<std::int64_t>& k_values, const TrialOptions& options,
                          const std::string& label = "");

struct Preset {
  std::string label;
  SamplingPlan plan;
  // Empty means every k in 1..m of the pool it runs on.
  std::vector<std::int64_t> k_values;
  // Cost allocation the configuration is named after, in units of C_N. Equal
  // to plan.budget_fraction() unless the sequence cannot meet it exactly.
  double nominal_budget = 0.0;
};

std::vector<Preset> builtin_presets();
const Preset& find_preset(const std::vector<Preset>& presets, const std::string& label);

std::vector<std::int64_t> all_k_values(const PerformancePool& pool);

// `label,k,mean_x,mean_y,std_y,trials`, preceded by '#' comment lines.
void write_frontier_csv(const std::vector<FrontierSeries>& series, std::ostream& out,
                        const std::vector<std::string>& comments = {});
nlohmann::json to_json(const FrontierSeries& series);

}  // namespace lcs
