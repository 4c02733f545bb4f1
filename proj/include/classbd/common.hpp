#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace classbd {

/// Bad inputs: violated preconditions, malformed configs, mismatched shapes.
/// CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical breakdown at runtime: singular systems, non-finite losses.
/// CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// API misuse (backward before forward, double backward). A programming
/// error, not an input error.
class UsageError : public std::logic_error {
public:
    explicit UsageError(const std::string& msg) : std::logic_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

/// Stable 64-bit stream splitter so one user seed can feed many independent
/// generators (per segment, per class, per epoch) without overlap.
/// SplitMix64 finalizer over the mixed words.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1) + 0xBF58476D1CE4E5B9ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline constexpr double kPi = 3.14159265358979323846;

} // namespace classbd
