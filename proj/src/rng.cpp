#include "wbigan/rng.hpp"

#include <cmath>
#include <numbers>

namespace wbigan {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix64(mix64(seed) ^ (stream * kGolden + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t Rng::next_u64() noexcept {
  // Two rounds of the splitmix finalizer over (key, counter).
  std::uint64_t x = key_ + (++counter_) * kGolden;
  return mix64(mix64(x) ^ key_);
}

double Rng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() noexcept {
  double u1 = 1.0 - uniform();  // (0, 1]
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::below(std::size_t n) noexcept {
  // Reject the low tail so the modulo is unbiased.
  const std::uint64_t range = n;
  const std::uint64_t threshold = (0 - range) % range;
  std::uint64_t r = next_u64();
  while (r < threshold) r = next_u64();
  return static_cast<std::size_t>(r % range);
}

Rng Rng::fork(std::uint64_t stream) const noexcept {
  Rng child(key_, stream + 1);
  return child;
}

}  // namespace wbigan
