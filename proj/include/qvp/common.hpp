#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qvp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid combination of settings (rejected before any work starts).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A search or enumeration exceeded its configured budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// Non-negative integer cost or infinity. Infinity marks a detected dead end.
class HeuristicValue {
 public:
  constexpr HeuristicValue() = default;
  constexpr explicit HeuristicValue(std::int64_t v) : value_(v) {}

  static constexpr HeuristicValue infinity() {
    return HeuristicValue(std::numeric_limits<std::int64_t>::max());
  }

  constexpr bool is_infinite() const {
    return value_ == std::numeric_limits<std::int64_t>::max();
  }
  constexpr bool is_finite() const { return !is_infinite(); }
  constexpr std::int64_t value() const { return value_; }

  friend constexpr auto operator<=>(HeuristicValue, HeuristicValue) = default;

  std::string to_string() const {
    return is_infinite() ? std::string("inf") : std::to_string(value_);
  }

 private:
  std::int64_t value_ = 0;
};

/// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Hierarchical seed split: derive_seed(root, a, b, ...) is stable across runs.
template <typename... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t parent, Tags... tags) {
  std::uint64_t s = mix_seed(parent);
  ((s = mix_seed(s ^ mix_seed(static_cast<std::uint64_t>(tags) + 0x5851f42d4c957f2dULL))), ...);
  return s;
}

inline std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seeded generator with portable bounded draws (std distributions are
/// implementation-defined, these are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  /// Uniform real in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool coin() { return (engine_() >> 63) != 0; }

  template <typename Container>
  void shuffle(Container& c) {
    for (std::size_t i = c.size(); i > 1; --i) {
      std::swap(c[i - 1], c[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qvp
