#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace wbigan {

// Counter-based generator: the n-th draw is a pure function of (key, n).
// Copying an Rng snapshots the stream; forks give independent substreams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller (one output per pair of uniforms).
  double normal() noexcept;
  // Uniform integer in [0, n). n must be > 0.
  std::size_t below(std::size_t n) noexcept;

  Rng fork(std::uint64_t stream) const noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace wbigan
