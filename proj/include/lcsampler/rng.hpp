#pragma once

#include <cstdint>
#include <limits>
#include <utility>

namespace lcs {

// Counter-based random stream. The output at position n depends only on
// (key, n), so streams derived via child() are reproducible regardless of
// which thread consumes them or in what order.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) noexcept;

  // Independent stream keyed by (this key, index). Does not advance *this.
  [[nodiscard]] RandomStream child(std::uint64_t index) const noexcept;

  result_type operator()() noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;

  // Unbiased uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) noexcept;

  // Two independent standard normals from one Box-Muller transform.
  // Always consumes exactly two words.
  std::pair<double, double> normal_pair() noexcept;

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// SplitMix64 finalizer; exposed for checksum and key derivation helpers.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace lcs
