#include "lcsampler/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "lcsampler/errors.hpp"
#include "lcsampler/format.hpp"

namespace lcs {

double cost_multiplier(double sampling_cost, std::int64_t k, std::int64_t m, std::int64_t target_volume) {
  if (m < 1 || target_volume < 1) throw InputError("m and the target volume must be positive");
  if (k < 0 || k > m) throw InputError("k must lie in [0, m]");
  const double full = static_cast<double>(m) * static_cast<double>(target_volume);
  return sampling_cost / full + static_cast<double>(k) / static_cast<double>(m);
}

double loss_multiplier(const std::vector<std::string>& selected, const PerformancePool& pool) {
  if (selected.empty()) throw InputError("selection is empty");
  const auto truth = target_losses(pool);
  double best_all = std::numeric_limits<double>::infinity();
  for (const auto& [id, loss] : truth) best_all = std::min(best_all, loss);
  double best_found = std::numeric_limits<double>::infinity();
  for (const auto& id : selected) {
    const auto it = truth.find(id);
    if (it == truth.end()) throw LookupError("unknown model " + id);
    best_found = std::min(best_found, it->second);
  }
  if (best_found == best_all) return 1.0;
  // L* = 0 with a worse selection has no finite multiplier.
  if (best_all == 0.0) return std::numeric_limits<double>::infinity();
  return best_found / best_all;
}

std::vector<TrialOutcome> run_single_trial(const PerformancePool& pool, const SamplingPlan& plan,
                                           const std::vector<std::int64_t>& k_values,
                                           std::uint64_t master_seed, std::int64_t trial_index,
                                           const ExecuteOptions& options) {
  const auto m = static_cast<std::int64_t>(pool.model_count());
  const auto ranking =
      rank_models(pool, plan, RandomStream(master_seed).child(static_cast<std::uint64_t>(trial_index)), options);
  const double full = static_cast<double>(m) * static_cast<double>(pool.target_volume());
  std::vector<TrialOutcome> out;
  out.reserve(k_values.size());
  for (auto k : k_values) {
    if (k < 1 || k > m)
      throw InputError("k = " + std::to_string(k) + " outside [1, m] with m = " + std::to_string(m));
    auto selection = select_top(ranking, static_cast<std::size_t>(k));
    TrialOutcome t;
    t.k = k;
    t.sampling_cost_fraction = static_cast<double>(selection.sampling_cost) / full;
    t.training_cost_fraction = static_cast<double>(k) / static_cast<double>(m);
    t.x_multiplier = t.sampling_cost_fraction + t.training_cost_fraction;
    t.y_multiplier = loss_multiplier(selection.selected, pool);
    t.selected = std::move(selection.selected);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::vector<TrialOutcome>> run_trial_outcomes(const PerformancePool& pool,
                                                          const SamplingPlan& plan,
                                                          const std::vector<std::int64_t>& k_values,
                                                          const TrialOptions& options) {
  if (options.trials < 1) throw InputError("trials must be positive");
  if (k_values.empty()) throw InputError("need at least one k value");
  const auto m = static_cast<std::int64_t>(pool.model_count());
  for (auto k : k_values) {
    if (k < 1 || k > m)
      throw InputError("k = " + std::to_string(k) + " outside [1, m] with m = " + std::to_string(m));
  }
  validate(plan);

  const auto trials = static_cast<std::size_t>(options.trials);
  std::vector<std::vector<TrialOutcome>> outcomes(trials);
  unsigned workers = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, trials));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (auto t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
      try {
        outcomes[t] = run_single_trial(pool, plan, k_values, options.master_seed,
                                       static_cast<std::int64_t>(t), options.execute);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool_threads;
    for (unsigned w = 0; w < workers; ++w) pool_threads.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return outcomes;
}

FrontierSeries aggregate(const std::string& label, const std::vector<std::int64_t>& k_values,
                         const std::vector<std::vector<TrialOutcome>>& outcomes) {
  FrontierSeries series{label, {}};
  for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
    FrontierPoint p;
    p.k = k_values[ki];
    p.trial_count = static_cast<std::int64_t>(outcomes.size());
    // Welford updates keep a constant column exactly constant.
    double mean_x = 0.0, mean_y = 0.0, m2 = 0.0, count = 0.0;
    for (const auto& trial : outcomes) {
      count += 1.0;
      mean_x += (trial[ki].x_multiplier - mean_x) / count;
      const double d = trial[ki].y_multiplier - mean_y;
      mean_y += d / count;
      m2 += d * (trial[ki].y_multiplier - mean_y);
    }
    p.mean_x = mean_x;
    p.mean_y = mean_y;
    if (outcomes.size() > 1) p.std_y = std::sqrt(m2 / (count - 1.0));
    series.points.push_back(p);
  }
  std::stable_sort(series.points.begin(), series.points.end(),
                   [](const FrontierPoint& a, const FrontierPoint& b) { return a.k < b.k; });
  return series;
}

FrontierSeries run_trials(const PerformancePool& pool, const SamplingPlan& plan,
                          const std::vector<std::int64_t>& k_values, const TrialOptions& options,
                          const std::string& label) {
  return aggregate(label, k_values, run_trial_outcomes(pool, plan, k_values, options));
}

std::vector<std::int64_t> all_k_values(const PerformancePool& pool) {
  std::vector<std::int64_t> out;
  for (std::int64_t k = 1; k <= static_cast<std::int64_t>(pool.model_count()); ++k) out.push_back(k);
  return out;
}

namespace {

std::string fraction_text(double f) {
  std::ostringstream s;
  s << f;
  return s.str();
}

std::string join_fractions(const std::vector<double>& fractions) {
  std::string out;
  for (double f : fractions) {
    if (!out.empty()) out += '-';
    out += fraction_text(f);
  }
  return out;
}

// Budget-derived preset; fails loudly if the catalog asks for an infeasible one.
Preset budget_preset(const std::string& prefix, const std::vector<double>& fractions, double budget) {
  return {prefix + "-" + join_fractions(fractions) + "-budget-" + fraction_text(budget),
          plan_from_budget(fractions, budget), {}, budget};
}

}  // namespace

std::vector<Preset> builtin_presets() {
  std::vector<Preset> out;
  auto add = [&](Preset p) {
    for (const auto& existing : out)
      if (existing.label == p.label) return;
    out.push_back(std::move(p));
  };

  // Single volume: real-data budgets and the simulated-curve budgets.
  for (double budget : {0.15, 0.3, 0.6, 0.45})
    for (double f : {0.05, 0.1, 0.15}) add(budget_preset("single", {f}, budget));
  add(budget_preset("single", {0.45}, 0.45));

  // Two volumes with x1 fixed at 1% of the target.
  for (double budget : {0.15, 0.3, 0.6, 0.16, 0.32, 0.64})
    for (double f : {0.04, 0.09, 0.14}) add(budget_preset("two", {0.01, f}, budget));

  // Four-volume sequences. The first cannot fit one repetition into 0.2 C_N;
  // its presets keep the nominal label with the smallest feasible repeats.
  const std::vector<std::vector<double>> sequences = {
      {0.01, 0.04, 0.08, 0.16}, {0.01, 0.02, 0.04, 0.08}, {0.01, 0.02, 0.03, 0.04}};
  for (const auto& seq : sequences) {
    for (double budget : {0.2, 0.3, 0.6}) {
      const double per_repeat = seq[0] + seq[1] + seq[2] + seq[3];
      SamplingPlan plan{seq, 1, PlanKind::multi_volume};
      if (per_repeat <= budget + 1e-9) plan = plan_from_budget(seq, budget);
      add({"four-" + join_fractions(seq) + "-budget-" + fraction_text(budget), plan, {}, budget});
    }
  }

  // Simulated-curve appendix: narrow spread at 0.32 and 0.64, wide at 0.6.
  add({"four-appendix-narrow-budget-0.32", plan_from_budget({0.01, 0.03, 0.05, 0.07}, 0.32), {}, 0.32});
  add({"four-appendix-narrow-budget-0.64", plan_from_budget({0.01, 0.03, 0.05, 0.07}, 0.64), {}, 0.64});
  add({"four-appendix-wide", plan_from_budget({0.01, 0.05, 0.09, 0.15}, 0.6), {}, 0.6});
  return out;
}

const Preset& find_preset(const std::vector<Preset>& presets, const std::string& label) {
  for (const auto& p : presets)
    if (p.label == label) return p;
  throw LookupError("unknown preset '" + label + "'");
}

void write_frontier_csv(const std::vector<FrontierSeries>& series, std::ostream& out,
                        const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "label,k,mean_x,mean_y,std_y,trials\n";
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      out << s.label << ',' << p.k << ',' << format_double(p.mean_x) << ',' << format_double(p.mean_y)
          << ',' << format_double(p.std_y) << ',' << p.trial_count << '\n';
    }
  }
}

nlohmann::json to_json(const FrontierSeries& series) {
  auto points = nlohmann::json::array();
  for (const auto& p : series.points) {
    points.push_back({{"k", p.k},
                      {"mean_x", p.mean_x},
                      {"mean_y", p.mean_y},
                      {"std_y", p.std_y},
                      {"trials", p.trial_count}});
  }
  return {{"label", series.label}, {"points", std::move(points)}};
}

}  // namespace lcs
