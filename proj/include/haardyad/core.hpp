#ifndef HAARDYAD_CORE_HPP
#define HAARDYAD_CORE_HPP

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace haardyad {

/// Largest spatial dimension supported by the fixed-capacity coordinate type.
inline constexpr int kMaxDim = 3;

/// Integer lattice vector. Only the first `dim` entries are meaningful; the
/// rest are kept at zero so that value comparison is well defined.
using Coord = std::array<std::int64_t, kMaxDim>;

// Error taxonomy shared by every module.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct RangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnsupportedError : std::logic_error {
    using std::logic_error::logic_error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ParameterError(what);
}

/// Floor division for signed integers (rounds toward negative infinity).
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

/// Canonical nonnegative residue.
constexpr std::int64_t mod_floor(std::int64_t a, std::int64_t b) {
    return a - floor_div(a, b) * b;
}

constexpr std::int64_t pow2(int e) { return std::int64_t{1} << e; }

/// SplitMix64 finalizer; used to derive independent streams from
/// (seed, index) pairs.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// The project's named generator: a 64-bit Mersenne twister whose state is
/// derived from (seed, stream). Streams with different indices are
/// statistically independent for all practical purposes.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(mix64(seed)),
                      static_cast<std::uint32_t>(mix64(seed) >> 32),
                      static_cast<std::uint32_t>(mix64(seed ^ mix64(stream))),
                      static_cast<std::uint32_t>(mix64(stream + 0x51ED2701ULL) >> 32)};
    return Rng(seq);
}

}  // namespace haardyad

#endif  // HAARDYAD_CORE_HPP
