#include "lcsampler/pool.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "lcsampler/errors.hpp"
#include "lcsampler/format.hpp"

namespace lcs {

namespace {

constexpr std::string_view kCsvHeader = "model_id,volume,repetition,loss,cost";
constexpr std::string_view kTargetPrefix = "#target_volume=";

void check_model_id(const std::string& id) {
  if (id.empty()) throw ValueError("model_id must not be empty");
  if (id.find_first_of(",\"\r\n#") != std::string::npos)
    throw ValueError("model_id '" + id + "' contains a reserved character");
}

std::string row_prefix(std::size_t line) { return "row " + std::to_string(line) + ": "; }

template <typename T>
T parse_field(std::string_view text, std::size_t line, const char* name) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty())
    throw SchemaError(row_prefix(line) + "cannot parse " + name + " '" + std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

PerformancePool::PerformancePool(std::vector<PoolEntry> entries, std::int64_t target_volume,
                                 double gamma)
    : entries_(std::move(entries)), target_volume_(target_volume), gamma_(gamma) {
  if (target_volume_ <= 0) throw ValueError("target_volume must be positive");
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) throw ValueError("gamma must be positive");
  if (entries_.empty()) throw SchemaError("pool has no entries");

  std::unordered_map<std::string, std::size_t> order;
  std::set<std::int64_t> volumes;
  for (const auto& e : entries_) {
    check_model_id(e.model_id);
    if (e.volume <= 0) throw ValueError("volume must be positive for model " + e.model_id);
    if (e.volume > target_volume_)
      throw ValueError("volume " + std::to_string(e.volume) + " exceeds target volume");
    if (e.repetition < 0) throw ValueError("repetition must be nonnegative");
    if (!(e.loss >= 0.0 && e.loss <= 1.0)) throw ValueError("loss outside [0, 1]");
    if (!(e.cost > 0.0) || !std::isfinite(e.cost)) throw ValueError("cost must be positive");
    if (order.emplace(e.model_id, models_.size()).second) models_.push_back(e.model_id);
    if (e.volume < target_volume_) volumes.insert(e.volume);
  }
  volumes_.assign(volumes.begin(), volumes.end());

  std::stable_sort(entries_.begin(), entries_.end(), [&](const PoolEntry& a, const PoolEntry& b) {
    const auto ma = order.at(a.model_id);
    const auto mb = order.at(b.model_id);
    if (ma != mb) return ma < mb;
    if (a.volume != b.volume) return a.volume < b.volume;
    return a.repetition < b.repetition;
  });

  for (std::size_t i = 0; i < entries_.size();) {
    std::size_t j = i;
    while (j < entries_.size() && entries_[j].model_id == entries_[i].model_id &&
           entries_[j].volume == entries_[i].volume) {
      if (j > i && entries_[j].repetition == entries_[j - 1].repetition)
        throw ConflictError("duplicate entry (" + entries_[j].model_id + ", " +
                            std::to_string(entries_[j].volume) + ", " +
                            std::to_string(entries_[j].repetition) + ")");
      ++j;
    }
    index_.emplace(std::make_pair(entries_[i].model_id, entries_[i].volume), std::make_pair(i, j));
    i = j;
  }

  for (const auto& model : models_) {
    if (!index_.contains({model, target_volume_}))
      throw SchemaError("model " + model + " has no entry at the target volume " +
                        std::to_string(target_volume_));
  }
}

bool PerformancePool::contains(const std::string& model_id, std::int64_t volume) const {
  return index_.contains({model_id, volume});
}

std::vector<double> PerformancePool::losses(const std::string& model_id, std::int64_t volume) const {
  const auto it = index_.find({model_id, volume});
  if (it == index_.end())
    throw LookupError("no entries for model " + model_id + " at volume " + std::to_string(volume));
  std::vector<double> out;
  for (auto i = it->second.first; i < it->second.second; ++i) out.push_back(entries_[i].loss);
  return out;
}

std::string simulated_model_id(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 2) digits.insert(0, 2 - digits.size(), '0');
  return "sim-" + digits;
}

PerformancePool generate_simulated_pool(const std::vector<SimCurveSpec>& specs,
                                        const std::vector<std::int64_t>& volumes,
                                        std::int64_t repeats, std::int64_t target_volume,
                                        std::uint64_t seed, NoiseMode noise) {
  if (specs.empty()) throw InputError("need at least one curve spec");
  if (repeats < 1) throw InputError("repeats must be positive");
  if (target_volume < 1) throw InputError("target volume must be positive");
  for (std::size_t i = 0; i < volumes.size(); ++i) {
    if (volumes[i] < 1) throw InputError("volumes must be positive");
    if (i > 0 && volumes[i] == volumes[i - 1]) throw InputError("duplicate volume " + std::to_string(volumes[i]));
    if (i > 0 && volumes[i] < volumes[i - 1]) throw InputError("volumes must be strictly increasing");
    if (volumes[i] > target_volume) throw InputError("volume exceeds target volume");
  }
  std::vector<std::int64_t> grid = volumes;
  if (grid.empty() || grid.back() != target_volume) grid.push_back(target_volume);

  const RandomStream root(seed);
  std::vector<PoolEntry> entries;
  entries.reserve(specs.size() * grid.size() * static_cast<std::size_t>(repeats));
  for (std::size_t s = 0; s < specs.size(); ++s) {
    validate(specs[s]);
    const auto id = simulated_model_id(s);
    const auto model_stream = root.child(s);
    for (std::size_t v = 0; v < grid.size(); ++v) {
      auto cell = model_stream.child(static_cast<std::uint64_t>(grid[v]));
      for (std::int64_t r = 0; r < repeats; ++r) {
        const auto volume = static_cast<double>(grid[v]);
        const double loss = noise == NoiseMode::noiseless
                                ? mean_loss(specs[s], volume)
                                : std::min(1.0, sample_loss(specs[s], volume, cell));
        entries.push_back({id, grid[v], r, loss, static_cast<double>(grid[v])});
      }
    }
  }
  return PerformancePool(std::move(entries), target_volume, 1.0);
}

PerformancePool ingest_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::int64_t target = -1;
  bool header_seen = false;
  std::vector<PoolEntry> entries;
  std::map<std::tuple<std::string, std::int64_t, std::int64_t>, std::size_t> seen;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.starts_with(kTargetPrefix)) {
      if (header_seen) throw SchemaError(row_prefix(line_no) + "target volume after header");
      target = parse_field<std::int64_t>(std::string_view(line).substr(kTargetPrefix.size()),
                                         line_no, "target_volume");
      continue;
    }
    if (line.front() == '#') continue;
    if (!header_seen) {
      if (line != kCsvHeader)
        throw SchemaError(row_prefix(line_no) + "expected header '" + std::string(kCsvHeader) + "'");
      if (target < 0) throw SchemaError(row_prefix(line_no) + "missing #target_volume line before header");
      header_seen = true;
      continue;
    }
    const auto fields = split_commas(line);
    if (fields.size() != 5)
      throw SchemaError(row_prefix(line_no) + "expected 5 fields, got " + std::to_string(fields.size()));
    PoolEntry e;
    e.model_id = std::string(fields[0]);
    e.volume = parse_field<std::int64_t>(fields[1], line_no, "volume");
    e.repetition = parse_field<std::int64_t>(fields[2], line_no, "repetition");
    e.loss = parse_field<double>(fields[3], line_no, "loss");
    e.cost = parse_field<double>(fields[4], line_no, "cost");
    try {
      check_model_id(e.model_id);
    } catch (const ValueError& err) {
      throw ValueError(row_prefix(line_no) + err.what());
    }
    if (!(e.loss >= 0.0 && e.loss <= 1.0))
      throw ValueError(row_prefix(line_no) + "loss " + std::string(fields[3]) + " outside [0, 1]");
    if (!(e.cost > 0.0)) throw ValueError(row_prefix(line_no) + "cost must be positive");
    if (e.volume <= 0 || e.volume > target)
      throw ValueError(row_prefix(line_no) + "volume must lie in [1, target_volume]");
    if (e.repetition < 0) throw ValueError(row_prefix(line_no) + "repetition must be nonnegative");
    const auto [it, fresh] = seen.emplace(std::make_tuple(e.model_id, e.volume, e.repetition), line_no);
    if (!fresh)
      throw ConflictError(row_prefix(line_no) + "duplicate key also on row " + std::to_string(it->second));
    entries.push_back(std::move(e));
  }
  if (!header_seen) throw SchemaError("missing CSV header");
  return PerformancePool(std::move(entries), target, 1.0);
}

void export_csv(const PerformancePool& pool, std::ostream& out) {
  out << kTargetPrefix << pool.target_volume() << '\n' << kCsvHeader << '\n';
  for (const auto& e : pool.entries()) {
    out << e.model_id << ',' << e.volume << ',' << e.repetition << ',' << format_double(e.loss)
        << ',' << format_double(e.cost) << '\n';
  }
}

std::string export_csv(const PerformancePool& pool) {
  std::ostringstream out;
  export_csv(pool, out);
  return out.str();
}

nlohmann::json to_json(const PerformancePool& pool) {
  auto rows = nlohmann::json::array();
  for (const auto& e : pool.entries()) {
    rows.push_back({{"model_id", e.model_id},
                    {"volume", e.volume},
                    {"repetition", e.repetition},
                    {"loss", e.loss},
                    {"cost", e.cost}});
  }
  return {{"target_volume", pool.target_volume()},
          {"gamma", pool.gamma()},
          {"models", pool.models()},
          {"volumes", pool.volumes()},
          {"entries", std::move(rows)}};
}

std::vector<double> draw(const PerformancePool& pool, const std::string& model_id,
                         std::int64_t volume, std::int64_t count, RandomStream& rng) {
  if (count < 1) throw InputError("draw count must be positive");
  auto recorded = pool.losses(model_id, volume);
  const auto n = recorded.size();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  // Partial Fisher-Yates: the first min(count, n) picks are distinct entries.
  auto fresh = std::min<std::size_t>(static_cast<std::size_t>(count), n);
  for (std::size_t i = 0; i < fresh; ++i) {
    const auto j = i + rng.uniform_index(n - i);
    std::swap(recorded[i], recorded[j]);
    out.push_back(recorded[i]);
  }
  while (out.size() < static_cast<std::size_t>(count)) out.push_back(recorded[rng.uniform_index(n)]);
  return out;
}

std::map<std::string, double> target_losses(const PerformancePool& pool) {
  std::map<std::string, double> out;
  for (const auto& model : pool.models()) {
    const auto values = pool.losses(model, pool.target_volume());
    double sum = 0.0;
    for (double v : values) sum += v;
    out.emplace(model, sum / static_cast<double>(values.size()));
  }
  return out;
}

}  // namespace lcs
