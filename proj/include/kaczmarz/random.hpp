#ifndef KACZMARZ_RANDOM_HPP
#define KACZMARZ_RANDOM_HPP

#include <cstdint>
#include <random>

namespace kaczmarz {

using Engine = std::mt19937_64;

/// Streams keyed off one master seed. Every consumer of randomness draws from
/// its own (seed, stream, index) engine, so results never depend on the order
/// in which trials are scheduled.
enum class Stream : std::uint32_t {
  matrix = 1,
  solution = 2,
  initial = 3,
  noise = 4,
  trial = 5,
  harness = 6,
};

inline Engine make_engine(std::uint64_t seed, Stream stream = Stream::trial,
                          std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Engine(seq);
}

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                 std::uint64_t index) {
  return make_engine(seed, stream, index)();
}

} // namespace kaczmarz

#endif // KACZMARZ_RANDOM_HPP
