#ifndef CSSLAB_RNG_H_
#define CSSLAB_RNG_H_

#include <cstdint>
#include <limits>
#include <random>

namespace csslab {

// Purpose tags for sub-streams. A run owns one 64-bit seed; every consumer of
// randomness draws from a stream derived from (seed, tag, index) so that
// toggling one consumer never perturbs another.
enum class StreamTag : std::uint64_t {
  kDataGlobal = 1,   // class means, then mixing-layer weights
  kDataImage = 2,    // index = global image index: placement, then noise
  kBackboneInit = 3,
  kExpand = 4,       // index = step
  kShuffle = 5,      // index = step
  kFuture = 6,       // index = step at which future rows are created
  kProbeInit = 7,
  kProbeShuffle = 8,
};

std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag,
                          std::uint64_t index = 0);

// mt19937_64 with a draw counter. Satisfies UniformRandomBitGenerator so the
// standard distributions can consume it directly.
class RngStream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}
  RngStream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0)
      : RngStream(derive_seed(seed, tag, index)) {}

  static constexpr result_type min() {
    return std::mt19937_64::min();
  }
  static constexpr result_type max() {
    return std::mt19937_64::max();
  }

  result_type operator()() {
    ++position_;
    return engine_();
  }

  double normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(*this);
  }
  // Inclusive range.
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(*this);
  }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(*this);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return position_; }

 private:
  std::uint64_t seed_;
  std::uint64_t position_ = 0;
  std::mt19937_64 engine_;
};

}  // namespace csslab

#endif  // CSSLAB_RNG_H_
