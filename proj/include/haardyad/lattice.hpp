#ifndef HAARDYAD_LATTICE_HPP
#define HAARDYAD_LATTICE_HPP

// Random shifted dyadic systems on a truncated level range.
//
// Geometry is exact: every coordinate is an integer in units of the finest
// cell size 2^{-fine}, where `fine` is the top level j_max of the owning
// system. A level-j cube therefore has integer side 2^{fine-j}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "haardyad/core.hpp"

namespace haardyad {

/// Per-level binary shift vectors beta_j for levels in (jmin, jmax].
/// Bit i of mask(j) is the i-th coordinate of beta_j.
class ShiftParameter {
public:
    ShiftParameter() = default;

    /// All-zero shift: reproduces the standard grid.
    ShiftParameter(int dim, int jmin, int jmax)
        : ShiftParameter(dim, jmin, jmax,
                         std::vector<std::uint32_t>(jmax > jmin ? jmax - jmin : 0, 0)) {}

    ShiftParameter(int dim, int jmin, int jmax, std::vector<std::uint32_t> masks)
        : dim_(dim), jmin_(jmin), jmax_(jmax), masks_(std::move(masks)) {
        require(dim >= 1 && dim <= kMaxDim, "dimension out of range");
        require(jmin <= jmax, "level range must be nonempty (jmin <= jmax)");
        require(jmax - jmin < 62, "level range too long for 64-bit geometry");
        require(masks_.size() == static_cast<std::size_t>(jmax - jmin),
                "shift bits must cover exactly the levels (jmin, jmax]");
        const std::uint32_t full = (1u << dim) - 1;
        for (auto m : masks_) require((m & ~full) == 0, "shift bit vector exceeds dimension");
        offsets_.assign(static_cast<std::size_t>(jmax - jmin + 1), Coord{});
        // offsets_[j - jmin] = sum_{l=j+1}^{jmax} 2^{jmax-l} beta_l
        for (int j = jmax - 1; j >= jmin; --j) {
            Coord o = offsets_[static_cast<std::size_t>(j + 1 - jmin)];
            const std::uint32_t m = mask(j + 1);
            for (int i = 0; i < dim; ++i)
                if ((m >> i) & 1u) o[i] += pow2(jmax - (j + 1));
            offsets_[static_cast<std::size_t>(j - jmin)] = o;
        }
    }

    int dim() const { return dim_; }
    int jmin() const { return jmin_; }
    int jmax() const { return jmax_; }

    std::uint32_t mask(int level) const {
        if (level <= jmin_ || level > jmax_)
            throw RangeError("shift level " + std::to_string(level) + " outside (jmin, jmax]");
        return masks_[static_cast<std::size_t>(level - jmin_ - 1)];
    }
    int bit(int level, int axis) const { return static_cast<int>((mask(level) >> axis) & 1u); }
    const std::vector<std::uint32_t>& masks() const { return masks_; }

    /// Offset of the level-j grid in finest units.
    const Coord& offset(int level) const {
        if (level < jmin_ || level > jmax_)
            throw RangeError("grid level " + std::to_string(level) + " outside [jmin, jmax]");
        return offsets_[static_cast<std::size_t>(level - jmin_)];
    }

    friend bool operator==(const ShiftParameter& a, const ShiftParameter& b) {
        return a.dim_ == b.dim_ && a.jmin_ == b.jmin_ && a.jmax_ == b.jmax_ && a.masks_ == b.masks_;
    }

private:
    int dim_ = 1;
    int jmin_ = 0;
    int jmax_ = 0;
    std::vector<std::uint32_t> masks_;
    std::vector<Coord> offsets_{Coord{}};
};

/// Draws every beta_j independently and uniformly from {0,1}^n.
inline ShiftParameter sample_beta(std::uint64_t seed, int jmin, int jmax, int dim) {
    require(jmin < jmax, "sample_beta: level range (jmin, jmax] must be nonempty");
    require(dim >= 1 && dim <= kMaxDim, "sample_beta: dimension out of range");
    Rng rng = make_rng(seed);
    std::uniform_int_distribution<std::uint32_t> pick(0, (1u << dim) - 1);
    std::vector<std::uint32_t> masks(static_cast<std::size_t>(jmax - jmin));
    for (auto& m : masks) m = pick(rng);
    return ShiftParameter(dim, jmin, jmax, std::move(masks));
}

/// A dyadic cube at `level` whose corner is measured in units of 2^{-fine}.
struct DyadicCube {
    int dim = 1;
    int level = 0;
    int fine = 0;
    Coord corner{};

    std::int64_t side() const { return pow2(fine - level); }
    std::int64_t lo(int i) const { return corner[i]; }
    std::int64_t hi(int i) const { return corner[i] + side(); }

    /// Sidelength as a real number, 2^{-level}.
    double length() const { return std::ldexp(1.0, -level); }
    double volume() const { return std::ldexp(1.0, -level * dim); }

    /// I+m*l(I).
    DyadicCube translate(const Coord& m) const {
        DyadicCube out = *this;
        for (int i = 0; i < dim; ++i) out.corner[i] += m[i] * side();
        return out;
    }

    bool contains(const DyadicCube& other) const {
        for (int i = 0; i < dim; ++i)
            if (other.lo(i) < lo(i) || other.hi(i) > hi(i)) return false;
        return true;
    }
    bool intersects(const DyadicCube& other) const {
        for (int i = 0; i < dim; ++i)
            if (other.hi(i) <= lo(i) || hi(i) <= other.lo(i)) return false;
        return true;
    }
    bool contains_point(const Coord& p) const {
        for (int i = 0; i < dim; ++i)
            if (p[i] < lo(i) || p[i] >= hi(i)) return false;
        return true;
    }

    /// Child with position bits `pos` (bit i set = upper half along axis i).
    DyadicCube child(std::uint32_t pos) const {
        DyadicCube c = *this;
        c.level = level + 1;
        const std::int64_t half = side() / 2;
        for (int i = 0; i < dim; ++i)
            if ((pos >> i) & 1u) c.corner[i] += half;
        return c;
    }

    friend bool operator==(const DyadicCube& a, const DyadicCube& b) {
        return a.dim == b.dim && a.level == b.level && a.fine == b.fine && a.corner == b.corner;
    }
    /// Decreasing sidelength first, then lexicographic corner.
    friend bool operator<(const DyadicCube& a, const DyadicCube& b) {
        if (a.level != b.level) return a.level < b.level;
        return a.corner < b.corner;
    }
};

/// Axis-aligned half-open box [lo, hi) in finest-grid units.
struct Window {
    int dim = 1;
    int fine = 0;
    Coord lo{};
    Coord hi{};

    std::int64_t extent(int i) const { return hi[i] - lo[i]; }
    std::int64_t cells() const {
        std::int64_t c = 1;
        for (int i = 0; i < dim; ++i) c *= extent(i);
        return c;
    }
    double cell_volume() const { return std::ldexp(1.0, -fine * dim); }
    double cell_length() const { return std::ldexp(1.0, -fine); }

    /// Linear index of a cell (row-major with axis 0 slowest).
    std::int64_t index(const Coord& cell) const {
        std::int64_t idx = 0;
        for (int i = 0; i < dim; ++i) idx = idx * extent(i) + (cell[i] - lo[i]);
        return idx;
    }
    Coord cell(std::int64_t idx) const {
        Coord c{};
        for (int i = dim - 1; i >= 0; --i) {
            c[i] = lo[i] + idx % extent(i);
            idx /= extent(i);
        }
        return c;
    }
    bool contains_cell(const Coord& c) const {
        for (int i = 0; i < dim; ++i)
            if (c[i] < lo[i] || c[i] >= hi[i]) return false;
        return true;
    }
    bool contains(const DyadicCube& q) const {
        for (int i = 0; i < dim; ++i)
            if (q.lo(i) < lo[i] || q.hi(i) > hi[i]) return false;
        return true;
    }
    bool meets(const DyadicCube& q) const {
        for (int i = 0; i < dim; ++i)
            if (q.hi(i) <= lo[i] || q.lo(i) >= hi[i]) return false;
        return true;
    }

    friend bool operator==(const Window& a, const Window& b) {
        return a.dim == b.dim && a.fine == b.fine && a.lo == b.lo && a.hi == b.hi;
    }

    /// Cube [lo, lo + size)^dim in units of 2^{-fine}.
    static Window cube(int dim, int fine, std::int64_t lo, std::int64_t size) {
        Window w{dim, fine, {}, {}};
        for (int i = 0; i < dim; ++i) {
            w.lo[i] = lo;
            w.hi[i] = lo + size;
        }
        return w;
    }
};

/// Dense indexing of the level-j cubes of a system that meet a window.
struct LevelGrid {
    int dim = 1;
    int level = 0;
    int fine = 0;
    Coord first{};  // corner of the cube with multi-index 0
    Coord count{};

    std::int64_t side() const { return pow2(fine - level); }
    std::int64_t size() const {
        std::int64_t s = 1;
        for (int i = 0; i < dim; ++i) s *= count[i];
        return s;
    }
    DyadicCube cube(std::int64_t idx) const {
        DyadicCube q{dim, level, fine, first};
        for (int i = dim - 1; i >= 0; --i) {
            q.corner[i] += (idx % count[i]) * side();
            idx /= count[i];
        }
        return q;
    }
    /// Index of a level-j cube of the same system, or -1 when it does not meet
    /// the window.
    std::int64_t index(const DyadicCube& q) const {
        std::int64_t idx = 0;
        for (int i = 0; i < dim; ++i) {
            const std::int64_t d = q.corner[i] - first[i];
            const std::int64_t k = d / side();
            if (d < 0 || k >= count[i]) return -1;
            idx = idx * count[i] + k;
        }
        return idx;
    }
    /// Index of the cube containing a finest cell.
    std::int64_t index_of_cell(const Coord& cell) const {
        std::int64_t idx = 0;
        for (int i = 0; i < dim; ++i) {
            const std::int64_t k = floor_div(cell[i] - first[i], side());
            if (k < 0 || k >= count[i]) return -1;
            idx = idx * count[i] + k;
        }
        return idx;
    }
};

// ---------------------------------------------------------------------------
// Cube-level operations that only need a shift parameter.

/// I + beta for a cube of the standard system.
inline DyadicCube shift_cube(const DyadicCube& cube, const ShiftParameter& beta) {
    if (beta.dim() != cube.dim) throw ParameterError("shift_cube: dimension mismatch");
    if (beta.jmax() != cube.fine || cube.level < beta.jmin() || cube.level > beta.jmax())
        throw ParameterError("shift_cube: shift parameter does not cover levels (level(I), jmax]");
    for (int i = 0; i < cube.dim; ++i)
        if (mod_floor(cube.corner[i], cube.side()) != 0)
            throw ParameterError("shift_cube: cube is not in the standard system");
    DyadicCube out = cube;
    const Coord& o = beta.offset(cube.level);
    for (int i = 0; i < cube.dim; ++i) out.corner[i] += o[i];
    return out;
}

/// Whether a cube is a member of the system defined by `beta`.
inline bool belongs(const DyadicCube& cube, const ShiftParameter& beta) {
    if (cube.dim != beta.dim() || cube.fine != beta.jmax()) return false;
    if (cube.level < beta.jmin() || cube.level > beta.jmax()) return false;
    const Coord& o = beta.offset(cube.level);
    for (int i = 0; i < cube.dim; ++i)
        if (mod_floor(cube.corner[i] - o[i], cube.side()) != 0) return false;
    return true;
}

/// The level-`level` cube of the system containing a finest-grid point.
inline DyadicCube cube_containing(const Coord& point, int level, const ShiftParameter& beta) {
    DyadicCube q{beta.dim(), level, beta.jmax(), {}};
    const Coord& o = beta.offset(level);
    const std::int64_t s = q.side();
    for (int i = 0; i < beta.dim(); ++i) q.corner[i] = o[i] + floor_div(point[i] - o[i], s) * s;
    return q;
}

/// k-th dyadic ancestor I^{(k)}.
inline DyadicCube ancestor(const DyadicCube& cube, int k, const ShiftParameter& beta) {
    if (k < 0) throw RangeError("ancestor: k must be nonnegative");
    if (cube.level - k < beta.jmin())
        throw RangeError("ancestor: k=" + std::to_string(k) + " exceeds available levels");
    if (k == 0) return cube;
    return cube_containing(cube.corner, cube.level - k, beta);
}

/// dist(I, J^c) in finest units, for I contained in J.
inline std::int64_t dist_to_complement(const DyadicCube& inner, const DyadicCube& outer) {
    if (inner.dim != outer.dim || inner.fine != outer.fine || !outer.contains(inner))
        throw ParameterError("dist_to_complement: inner cube is not contained in outer cube");
    std::int64_t d = outer.side();
    for (int i = 0; i < inner.dim; ++i) {
        d = std::min(d, inner.lo(i) - outer.lo(i));
        d = std::min(d, outer.hi(i) - inner.hi(i));
    }
    return d;
}

/// Badness parameters r and gamma = num/den.
struct BadnessParams {
    int r = 1;
    int gamma_num = 1;
    int gamma_den = 2;
    /// Largest ancestor depth k inspected; negative means "all available".
    int max_depth = -1;

    double gamma() const { return static_cast<double>(gamma_num) / gamma_den; }
    void validate() const {
        require(r >= 1, "badness: r must be a positive integer");
        require(0 < gamma_num && gamma_num < gamma_den, "badness: gamma must lie in (0,1)");
    }
};

namespace impl {

/// Decides dist <= side * 2^{k(1-gamma)} exactly by raising to the power
/// den: dist^den <= side^den * 2^{k(den-num)}.
inline bool within_badness_threshold(std::int64_t dist, std::int64_t side, int k,
                                     const BadnessParams& p) {
    if (dist <= side) return true;  // 2^{k(1-gamma)} >= 1
    const int a = p.gamma_num;
    const int b = p.gamma_den;
    const double lhs = b * std::log2(static_cast<double>(dist));
    const double rhs = b * std::log2(static_cast<double>(side)) + static_cast<double>(k) * (b - a);
    if (lhs < rhs - 1e-6) return true;
    if (lhs > rhs + 1e-6) return false;
    using boost::multiprecision::cpp_int;
    cpp_int l = boost::multiprecision::pow(cpp_int(dist), static_cast<unsigned>(b));
    cpp_int r = boost::multiprecision::pow(cpp_int(side), static_cast<unsigned>(b));
    r <<= static_cast<unsigned>(k * (b - a));
    return l <= r;
}

}  // namespace impl

/// Whether the cube is bad in the system defined by `beta`: some ancestor
/// J = I^{(k)}, r <= k <= (level - jmin), satisfies
/// dist(I, J^c) <= l(I)^gamma l(J)^{1-gamma}.
inline bool is_bad(const DyadicCube& cube, const BadnessParams& params, const ShiftParameter& beta) {
    params.validate();
    if (!belongs(cube, beta)) throw ParameterError("is_bad: cube does not belong to the system");
    int kmax = cube.level - beta.jmin();
    if (params.max_depth >= 0) kmax = std::min(kmax, params.max_depth);
    if (kmax < params.r)
        throw RangeError("is_bad: no ancestor with k >= r inside the level range");
    for (int k = params.r; k <= kmax; ++k) {
        const DyadicCube anc = ancestor(cube, k, beta);
        const std::int64_t d = dist_to_complement(cube, anc);
        if (impl::within_badness_threshold(d, cube.side(), k, params)) return true;
    }
    return false;
}

/// Upper bound 4n 2^{-r gamma} / (1 - 2^{-gamma}) for the badness probability.
inline double pi_bad_bound(int dim, const BadnessParams& params) {
    const double g = params.gamma();
    return 4.0 * dim * std::exp2(-params.r * g) / (1.0 - std::exp2(-g));
}

/// Smallest r for which the bound drops below 1/2.
inline int default_r(int dim, int gamma_num, int gamma_den) {
    for (int r = 1;; ++r) {
        BadnessParams p{r, gamma_num, gamma_den};
        if (pi_bad_bound(dim, p) < 0.5) return r;
    }
}

// ---------------------------------------------------------------------------
// Systems with a window.

/// A shifted dyadic system restricted to a finite window. The finest level
/// jmax equals the window's `fine` level.
class DyadicSystem {
public:
    DyadicSystem(Window window, ShiftParameter shift) : window_(window), shift_(std::move(shift)) {
        require(window_.dim == shift_.dim(), "system: window and shift dimension differ");
        require(window_.fine == shift_.jmax(), "system: window resolution must equal jmax");
        for (int i = 0; i < window_.dim; ++i)
            require(window_.hi[i] > window_.lo[i], "system: empty window");
    }

    int dim() const { return window_.dim; }
    int jmin() const { return shift_.jmin(); }
    int jmax() const { return shift_.jmax(); }
    const Window& window() const { return window_; }
    const ShiftParameter& shift() const { return shift_; }

    /// Level-j cubes meeting the window, densely indexed.
    LevelGrid level_grid(int level) const {
        if (level < jmin() || level > jmax())
            throw RangeError("level " + std::to_string(level) + " outside the system range");
        LevelGrid g{dim(), level, jmax(), {}, {}};
        const std::int64_t s = g.side();
        const Coord& o = shift_.offset(level);
        for (int i = 0; i < dim(); ++i) {
            const std::int64_t q0 = floor_div(window_.lo[i] - o[i], s);
            const std::int64_t q1 = floor_div(window_.hi[i] - 1 - o[i], s);
            g.first[i] = o[i] + q0 * s;
            g.count[i] = q1 - q0 + 1;
        }
        return g;
    }

    std::vector<DyadicCube> cubes(int level) const {
        const LevelGrid g = level_grid(level);
        std::vector<DyadicCube> out;
        out.reserve(static_cast<std::size_t>(g.size()));
        for (std::int64_t k = 0; k < g.size(); ++k) out.push_back(g.cube(k));
        return out;
    }

    bool contains(const DyadicCube& q) const { return belongs(q, shift_); }

    DyadicCube ancestor(const DyadicCube& q, int k) const { return haardyad::ancestor(q, k, shift_); }
    bool is_bad(const DyadicCube& q, const BadnessParams& p) const {
        return haardyad::is_bad(q, p, shift_);
    }

private:
    Window window_;
    ShiftParameter shift_;
};

/// Smallest window containing `w` that is a union of level-jmin cubes of the
/// system given by `beta`. On such a window E_j commutes with restriction.
inline Window covering_window(const Window& w, const ShiftParameter& beta) {
    require(w.dim == beta.dim() && w.fine == beta.jmax(), "covering_window: window does not match shift");
    Window out = w;
    const std::int64_t s = pow2(beta.jmax() - beta.jmin());
    const Coord& o = beta.offset(beta.jmin());
    for (int i = 0; i < w.dim; ++i) {
        out.lo[i] = o[i] + floor_div(w.lo[i] - o[i], s) * s;
        out.hi[i] = o[i] + (floor_div(w.hi[i] - 1 - o[i], s) + 1) * s;
    }
    return out;
}

/// System on the covering window of `w`.
inline DyadicSystem covering_system(const Window& w, const ShiftParameter& beta) {
    return DyadicSystem(covering_window(w, beta), beta);
}

inline DyadicCube ancestor(const DyadicCube& cube, int k, const DyadicSystem& system) {
    return system.ancestor(cube, k);
}
inline bool is_bad(const DyadicCube& cube, const BadnessParams& params, const DyadicSystem& system) {
    return system.is_bad(cube, params);
}

// ---------------------------------------------------------------------------
// Exact enumeration of shift states.

/// Calls `fn` with every shift parameter whose bits on `levels` range over all
/// of {0,1}^{n * |levels|}, the remaining bits being taken from `base`.
/// Throws ResourceError when the state count exceeds `limit`.
inline std::uint64_t for_each_shift(const ShiftParameter& base, const std::vector<int>& levels,
                                    const std::function<void(const ShiftParameter&)>& fn,
                                    std::uint64_t limit = std::uint64_t{1} << 24) {
    const int n = base.dim();
    const int bits = n * static_cast<int>(levels.size());
    if (bits >= 63 || (std::uint64_t{1} << bits) > limit)
        throw ResourceError("enumeration needs 2^" + std::to_string(bits) +
                            " shift states, limit is " + std::to_string(limit));
    for (int l : levels) base.mask(l);  // range check
    const std::uint64_t states = std::uint64_t{1} << bits;
    const std::uint32_t full = (1u << n) - 1;
    for (std::uint64_t s = 0; s < states; ++s) {
        std::vector<std::uint32_t> masks = base.masks();
        for (std::size_t t = 0; t < levels.size(); ++t)
            masks[static_cast<std::size_t>(levels[t] - base.jmin() - 1)] =
                static_cast<std::uint32_t>(s >> (n * t)) & full;
        fn(ShiftParameter(n, base.jmin(), base.jmax(), std::move(masks)));
    }
    return states;
}

inline std::vector<int> level_span(int from, int to) {
    std::vector<int> out;
    for (int l = from; l <= to; ++l) out.push_back(l);
    return out;
}

// ---------------------------------------------------------------------------
// Probability estimates.

struct ProbabilityEstimate {
    double mean = 0.0;
    std::int64_t trials = 0;
    double standard_error = 0.0;
    /// Bound on the probability mass neglected by truncating ancestors.
    double truncation_tail = 0.0;
};

inline constexpr int kDefaultDepthMargin = 24;

/// Monte Carlo frequency of badness of I + beta for I = [0,1)^n, using
/// ancestors up to depth r + depth_margin. Trial t uses stream (seed, t).
inline ProbabilityEstimate estimate_pi_bad(int dim, const BadnessParams& params,
                                           std::int64_t trials, std::uint64_t seed,
                                           int depth_margin = kDefaultDepthMargin) {
    params.validate();
    require(trials >= 1, "estimate_pi_bad: trials must be >= 1");
    require(dim >= 1 && dim <= kMaxDim, "estimate_pi_bad: dimension out of range");
    if (depth_margin < 0) throw RangeError("estimate_pi_bad: negative depth margin");
    const int depth = params.r + depth_margin;
    if (depth > 56) throw RangeError("estimate_pi_bad: ancestor depth exceeds 64-bit geometry");
    const int jmax = 0;
    const int jmin = -depth;
    std::int64_t bad = 0;
    const DyadicCube ref{dim, 0, 0, Coord{}};
    std::uniform_int_distribution<std::uint32_t> pick(0, (1u << dim) - 1);
    for (std::int64_t t = 0; t < trials; ++t) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(t));
        std::vector<std::uint32_t> masks(static_cast<std::size_t>(jmax - jmin));
        for (auto& m : masks) m = pick(rng);
        const ShiftParameter beta(dim, jmin, jmax, std::move(masks));
        if (is_bad(shift_cube(ref, beta), params, beta)) ++bad;
    }
    ProbabilityEstimate e;
    e.trials = trials;
    e.mean = static_cast<double>(bad) / static_cast<double>(trials);
    e.standard_error = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(trials));
    BadnessParams tail = params;
    tail.r = depth;
    e.truncation_tail = pi_bad_bound(dim, tail);
    return e;
}

/// Exact joint law of (badness, absolute position) of I + beta under uniform
/// enumeration of all shift bits in (jmin, jmax], for I the standard cube at
/// `ref_level` with corner 0.
struct IndependenceTable {
    std::int64_t states = 0;
    double p_bad = 0.0;
    std::map<Coord, double> p_offset;               // marginal of position
    std::map<std::pair<int, Coord>, double> joint;  // (bad, position)
    double max_deviation = 0.0;                     // max |P(b,o) - P(b)P(o)|
};

inline IndependenceTable badness_position_independence(int dim, const BadnessParams& params,
                                                       int jmin, int ref_level, int jmax) {
    params.validate();
    require(jmin < ref_level && ref_level <= jmax, "independence: need jmin < ref_level <= jmax");
    IndependenceTable tab;
    const ShiftParameter base(dim, jmin, jmax);
    const DyadicCube ref{dim, ref_level, jmax, Coord{}};
    std::map<std::pair<int, Coord>, std::int64_t> counts;
    tab.states = static_cast<std::int64_t>(
        for_each_shift(base, level_span(jmin + 1, jmax), [&](const ShiftParameter& beta) {
            const DyadicCube q = shift_cube(ref, beta);
            ++counts[{is_bad(q, params, beta) ? 1 : 0, q.corner}];
        }));
    const double total = static_cast<double>(tab.states);
    double pb = 0.0;
    for (const auto& [key, c] : counts) {
        const double p = static_cast<double>(c) / total;
        tab.joint[key] = p;
        tab.p_offset[key.second] += p;
        if (key.first == 1) pb += p;
    }
    tab.p_bad = pb;
    for (const auto& [o, po] : tab.p_offset) {
        for (int b = 0; b <= 1; ++b) {
            auto it = tab.joint.find({b, o});
            const double pj = it == tab.joint.end() ? 0.0 : it->second;
            const double pm = (b == 1 ? pb : 1.0 - pb) * po;
            tab.max_deviation = std::max(tab.max_deviation, std::abs(pj - pm));
        }
    }
    return tab;
}

/// Exact P(I + beta is good) for a cube at `level`, enumerating only the
/// shift bits that goodness depends on.
inline double exact_pi_good(const ShiftParameter& base, int level, const BadnessParams& params,
                            const std::vector<int>& enumerated) {
    const DyadicCube ref{base.dim(), level, base.jmax(), Coord{}};
    std::int64_t good = 0;
    const auto states = for_each_shift(base, enumerated, [&](const ShiftParameter& beta) {
        if (!is_bad(shift_cube(ref, beta), params, beta)) ++good;
    });
    return static_cast<double>(good) / static_cast<double>(states);
}

}  // namespace haardyad

#endif  // HAARDYAD_LATTICE_HPP
