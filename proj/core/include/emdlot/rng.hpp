#ifndef EMDLOT_RNG_HPP
#define EMDLOT_RNG_HPP

#include <cstdint>
#include <vector>

namespace emdlot {

// Deterministic 64-bit generator: xoshiro256** with splitmix64 state
// expansion. The algorithm and its constants are fixed here so that a given
// seed reproduces the same draw sequence on every platform and build.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed);

  uint64_t seed() const { return seed_; }
  uint64_t next_u64();

  // Uniform on [0,1) with 53 random bits.
  double uniform();
  // Uniform on [lo,hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0,n), n > 0. Rejection sampling, no modulo bias.
  uint64_t uniform_int(uint64_t n);
  // Standard normal via Box-Muller; each call consumes two uniform draws.
  double normal();
  double normal(double mean, double sd);

  // Fisher-Yates shuffle of index vector.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent stream (for per-trial / per-run seeds).
  uint64_t fork_seed();

 private:
  uint64_t seed_;
  uint64_t s_[4];
};

}  // namespace emdlot

#endif
