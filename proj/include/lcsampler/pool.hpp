#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lcsampler/curve_model.hpp"
#include "lcsampler/rng.hpp"

namespace lcs {

struct PoolEntry {
  std::string model_id;
  std::int64_t volume = 0;
  std::int64_t repetition = 0;
  double loss = 0.0;
  double cost = 0.0;

  friend bool operator==(const PoolEntry&, const PoolEntry&) = default;
};

// Immutable set of recorded training outcomes. Entries are stored sorted by
// (model order, volume, repetition); models keep their first-seen order.
class PerformancePool {
 public:
  PerformancePool(std::vector<PoolEntry> entries, std::int64_t target_volume, double gamma = 1.0);

  [[nodiscard]] const std::vector<PoolEntry>& entries() const noexcept { return entries_; }
  [[nodiscard]] std::int64_t target_volume() const noexcept { return target_volume_; }
  [[nodiscard]] double gamma() const noexcept { return gamma_; }
  [[nodiscard]] const std::vector<std::string>& models() const noexcept { return models_; }
  // Distinct sampling volumes below the target, ascending.
  [[nodiscard]] const std::vector<std::int64_t>& volumes() const noexcept { return volumes_; }
  [[nodiscard]] std::size_t model_count() const noexcept { return models_.size(); }

  // Losses recorded for (model, volume) in repetition order. Throws LookupError.
  [[nodiscard]] std::vector<double> losses(const std::string& model_id, std::int64_t volume) const;
  [[nodiscard]] bool contains(const std::string& model_id, std::int64_t volume) const;

  friend bool operator==(const PerformancePool&, const PerformancePool&) = default;

 private:
  std::vector<PoolEntry> entries_;
  std::int64_t target_volume_;
  double gamma_;
  std::vector<std::string> models_;
  std::vector<std::int64_t> volumes_;
  std::map<std::pair<std::string, std::int64_t>, std::pair<std::size_t, std::size_t>> index_;
};

enum class NoiseMode {
  stochastic,
  // Every outcome is the noiseless mean curve; useful as an exact oracle.
  noiseless,
};

// Simulated pool: model ids "sim-00", "sim-01", ...; `repeats` outcomes per
// (spec, volume) plus `repeats` at the target. Cost = volume (gamma = 1).
// Each (spec, volume) cell uses its own child stream of `seed`.
PerformancePool generate_simulated_pool(const std::vector<SimCurveSpec>& specs,
                                        const std::vector<std::int64_t>& volumes,
                                        std::int64_t repeats, std::int64_t target_volume,
                                        std::uint64_t seed,
                                        NoiseMode noise = NoiseMode::stochastic);

std::string simulated_model_id(std::size_t index);

// CSV layout:
//   #target_volume=<int>
//   model_id,volume,repetition,loss,cost
//   <rows>
// Other '#' lines are comments and may appear anywhere.
PerformancePool ingest_csv(std::istream& in);
void export_csv(const PerformancePool& pool, std::ostream& out);
std::string export_csv(const PerformancePool& pool);

nlohmann::json to_json(const PerformancePool& pool);

// `count` losses for (model, volume): without replacement until the recorded
// repetitions run out, then uniformly with replacement.
std::vector<double> draw(const PerformancePool& pool, const std::string& model_id,
                         std::int64_t volume, std::int64_t count, RandomStream& rng);

// Mean recorded loss at the target volume, per model.
std::map<std::string, double> target_losses(const PerformancePool& pool);

}  // namespace lcs
