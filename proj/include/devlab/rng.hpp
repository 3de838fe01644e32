#ifndef DEVLAB_RNG_HPP
#define DEVLAB_RNG_HPP

#include <cstdint>

namespace devlab {

namespace detail {

// SplitMix64 output finalizer (Steele, Lea & Flood).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

}  // namespace detail

/// Counter-based stream: the i-th output is a pure function of (key, i), so
/// a replicate's draws do not depend on which worker produced them.
class Stream {
public:
  constexpr explicit Stream(std::uint64_t key) : key_(key) {}

  constexpr std::uint64_t next_u64() {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGoldenGamma);
  }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  constexpr double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t position() const { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Keyed family of streams. `stream(i)` is the stream of replicate i;
/// `child(tag)` derives an independent family (e.g. one per n in a grid).
class Rng {
public:
  constexpr explicit Rng(std::uint64_t seed) : key_(detail::mix64(seed ^ 0x6A09E667F3BCC909ULL)) {}

  constexpr Rng child(std::uint64_t tag) const {
    return Rng(detail::mix64(key_ ^ detail::mix64(tag + 0xBB67AE8584CAA73BULL)), Raw{});
  }

  constexpr Stream stream(std::uint64_t index) const {
    return Stream(detail::mix64(key_ + detail::mix64(index * detail::kGoldenGamma + 1)));
  }

private:
  struct Raw {};
  constexpr Rng(std::uint64_t key, Raw) : key_(key) {}

  std::uint64_t key_;
};

}  // namespace devlab

#endif  // DEVLAB_RNG_HPP
