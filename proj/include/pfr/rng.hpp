#ifndef PFR_RNG_HPP
#define PFR_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace pfr {

/// Philox4x32-10 counter-based bit generator.
///
/// The 64-bit key selects the seed and the upper half of the 128-bit counter
/// selects an independent substream, so any (seed, stream) pair can be
/// reconstructed without replaying other streams.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key);
};

/// UniformRandomBitGenerator over Philox4x32-10 producing 64-bit words.
class PhiloxEngine {
 public:
  using result_type = std::uint64_t;

  PhiloxEngine(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/// Reproducible random stream: one Philox substream plus the distribution
/// state that goes with it.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent child stream; children of different ids never overlap.
  RandomStream split(std::uint64_t child) const;

  double uniform();  // [0, 1)
  double normal();
  std::uint64_t uniform_index(std::uint64_t n);  // [0, n)

  PhiloxEngine& engine() { return engine_; }
  std::uint64_t seed() const { return engine_.seed(); }
  std::uint64_t stream() const { return engine_.stream(); }

 private:
  PhiloxEngine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Substream identifiers used by the library so that independent purposes
/// drawn from one user seed never share random numbers.
namespace streams {
inline constexpr std::uint64_t kMatrix = 1;
inline constexpr std::uint64_t kSolution = 2;
inline constexpr std::uint64_t kRhsNoise = 3;
inline constexpr std::uint64_t kGraph = 4;
inline constexpr std::uint64_t kNodeValues = 5;
inline constexpr std::uint64_t kOracle = 6;
inline constexpr std::uint64_t kTrialBase = std::uint64_t{1} << 32;
}  // namespace streams

}  // namespace pfr

#endif  // PFR_RNG_HPP
