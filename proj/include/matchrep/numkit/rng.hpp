#pragma once
// SplitMix64 stream (Steele, Lea & Flood 2014). The state is a plain 64-bit
// counter advanced by the golden-ratio increment; every output is a fixed
// bijective mix of the counter, so sequences are identical on every platform.
// Gaussian draws use Box-Muller on two 53-bit uniforms.

#include <cstdint>
#include <span>
#include <string_view>

namespace matchrep::num {

// 64-bit FNV-1a of a component name; used for seed derivation.
std::uint64_t fnv1a64(std::string_view text) noexcept;

// Child seed for a named component: mix(root ^ fnv1a64(name)).
std::uint64_t derive_seed(std::uint64_t root, std::string_view component) noexcept;

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) noexcept : seed_(seed), state_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;
  // Uniform on [0, 1) with 53 bits of precision.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // Unbiased integer in [0, n); n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n) noexcept;
  double normal() noexcept;
  double normal(double mean, double sd) noexcept { return mean + sd * normal(); }
  // Index drawn with probability proportional to weights.
  std::size_t categorical(std::span<const double> weights);
  void shuffle(std::span<std::size_t> items) noexcept;

  // Independent stream for a named sub-component; does not advance this one.
  RngStream split(std::string_view name) const noexcept {
    return RngStream(derive_seed(seed_, name));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace matchrep::num
