#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace mapomdp {

// Purposes for derived streams. Values are part of the reproducibility
// contract; append only.
enum class Stream : std::uint64_t {
  kInitialState = 1,
  kEnvironment = 2,
  kCloud = 3,
  kRollout = 4,
  kPolicy = 5,
  kBuffer = 6,
  kTraining = 7,
  kSampleGen = 8,
  kEvaluation = 9,
  kScenario = 10,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Child seed for (root, k0, k1, ...). Order of keys matters.
constexpr std::uint64_t derive_seed(std::uint64_t root,
                                    std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(root);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
  return h;
}

// SplitMix64 stream. One word of state, so opening a stream per trajectory
// costs nothing.
class Rng {
 public:
  using result_type = std::uint64_t;
  explicit constexpr Rng(std::uint64_t seed = 0) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  constexpr result_type operator()() {
    const result_type out = splitmix64(state_);
    state_ += 0x9E3779B97F4A7C15ULL;
    return out;
  }

 private:
  std::uint64_t state_;
};

constexpr std::uint64_t key(Stream s) { return static_cast<std::uint64_t>(s); }

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Uniform on [0, 1) with 53 random bits; independent of the standard
// library's distribution implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

// Inverse-CDF draw; the last index with positive mass absorbs round-off.
inline std::size_t sample_categorical(std::span<const double> p, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    last = i;
    acc += p[i];
    if (u < acc) return i;
  }
  return last;
}

}  // namespace mapomdp
