#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace signoise {

/// Seeded random source whose output depends only on the seed.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard.
/// The standard distributions are implementation-defined, so uniform, bounded
/// integer and normal draws are computed here instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for work item `stream_id` under a base seed. Used so
  /// that parallel draws/trials never depend on scheduling.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal variate (Marsaglia polar method).
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Fisher-Yates shuffle driven by Rng::below.
template <class T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

/// `count` distinct indices from [0, population), sorted ascending (Floyd's method).
std::vector<std::size_t> sample_indices(Rng& rng, std::size_t population, std::size_t count);

}  // namespace signoise
