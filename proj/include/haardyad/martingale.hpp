#ifndef HAARDYAD_MARTINGALE_HPP
#define HAARDYAD_MARTINGALE_HPP

// Compatibility partition of the good cubes and the two-element difference
// sequences that realise shifted Haar functions as martingale transforms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "haardyad/haar.hpp"

namespace haardyad {

/// psi(I) = I + m_j l(I) with j = level(I). A constant map has one translate
/// for every level.
class ShiftMap {
public:
    static ShiftMap constant(int dim, const Coord& m) {
        ShiftMap s;
        s.dim_ = dim;
        s.translates_ = {m};
        s.constant_ = true;
        s.check();
        return s;
    }
    /// Translates for levels jmin, jmin+1, ...
    ShiftMap(int dim, int jmin, std::vector<Coord> translates)
        : dim_(dim), jmin_(jmin), translates_(std::move(translates)) {
        require(!translates_.empty(), "shift map: no translates");
        check();
    }

    int dim() const { return dim_; }
    bool is_constant() const { return constant_; }
    int jmin() const { return jmin_; }
    int jmax() const { return jmin_ + static_cast<int>(translates_.size()) - 1; }

    const Coord& at(int level) const {
        if (constant_) return translates_.front();
        if (level < jmin() || level > jmax())
            throw RangeError("shift map: no translate for level " + std::to_string(level));
        return translates_[static_cast<std::size_t>(level - jmin_)];
    }
    DyadicCube operator()(const DyadicCube& q) const { return q.translate(at(q.level)); }
    DyadicCube inverse(const DyadicCube& q) const {
        Coord m = at(q.level);
        for (int i = 0; i < dim_; ++i) m[i] = -m[i];
        return q.translate(m);
    }
    bool fixes(int level) const {
        const Coord& m = at(level);
        for (int i = 0; i < dim_; ++i)
            if (m[i] != 0) return false;
        return true;
    }

    /// sup_j |m_j|^2 (Euclidean).
    std::int64_t sup_norm_squared() const {
        std::int64_t s = 0;
        for (const Coord& m : translates_) {
            std::int64_t e = 0;
            for (int i = 0; i < dim_; ++i) e += m[i] * m[i];
            s = std::max(s, e);
        }
        return s;
    }

private:
    ShiftMap() = default;
    void check() const {
        require(dim_ >= 1 && dim_ <= kMaxDim, "shift map: unsupported dimension");
        for (const Coord& m : translates_)
            for (int i = dim_; i < kMaxDim; ++i) require(m[i] == 0, "shift map: unused coordinates must be zero");
    }

    int dim_ = 1;
    int jmin_ = 0;
    std::vector<Coord> translates_;
    bool constant_ = false;
};

/// M = max{r, ceil((1-gamma)^{-1} log2+ sup|m_j|)}. The ceiling is decided
/// exactly: the smallest M with 2^{2M(den-num)} >= |m|^{2 den}.
inline int shift_complexity(const ShiftMap& psi, const BadnessParams& params) {
    params.validate();
    using boost::multiprecision::cpp_int;
    const std::int64_t s = psi.sup_norm_squared();
    int M = 0;
    if (s > 1) {
        const cpp_int target = boost::multiprecision::pow(cpp_int(s), static_cast<unsigned>(params.gamma_den));
        const unsigned step = 2u * static_cast<unsigned>(params.gamma_den - params.gamma_num);
        cpp_int lhs = 1;
        while (lhs < target) {
            lhs <<= step;
            ++M;
        }
    }
    return std::max(params.r, M);
}

/// a(I) = log2 l(I) mod (M+1), as the canonical residue of -level.
inline int level_class(const DyadicCube& q, int M) {
    require(M >= 0, "level_class: M must be nonnegative");
    return static_cast<int>(mod_floor(-static_cast<std::int64_t>(q.level), M + 1));
}

/// Alternating colouring along the orbits of psi inside the given cube set.
/// Orbits restricted to a finite set are paths; each path starts at a cube
/// whose preimage is not in the set and is coloured 0, 1, 0, ... from there.
/// Cubes on a level fixed by psi are singletons with colour 0.
inline std::vector<int> orbit_parity(const std::vector<DyadicCube>& cubes, const ShiftMap& psi) {
    std::map<std::pair<int, Coord>, std::size_t> where;
    for (std::size_t i = 0; i < cubes.size(); ++i) where.emplace(std::make_pair(cubes[i].level, cubes[i].corner), i);
    std::vector<int> parity(cubes.size(), -1);
    std::vector<std::size_t> chain;
    for (std::size_t i = 0; i < cubes.size(); ++i) {
        if (parity[i] >= 0) continue;
        if (psi.fixes(cubes[i].level)) {
            parity[i] = 0;
            continue;
        }
        chain.assign(1, i);
        int start = 0;
        while (true) {
            const DyadicCube prev = psi.inverse(cubes[chain.back()]);
            const auto it = where.find({prev.level, prev.corner});
            if (it == where.end()) break;
            if (parity[it->second] >= 0) {
                start = 1 - parity[it->second];
                break;
            }
            if (chain.size() > cubes.size()) throw ParameterError("orbit_parity: psi has a cycle on the cube set");
            chain.push_back(it->second);
        }
        for (std::size_t k = chain.size(); k-- > 0;) {
            parity[chain[k]] = start;
            start = 1 - start;
        }
    }
    return parity;
}

/// m-compatibility: I u psi(I) and J u psi(J) are disjoint, or one of the two
/// unions lies in a proper dyadic subcube of the other pair's J or psi(J).
inline bool compatibility_check(const DyadicCube& I, const DyadicCube& J, const ShiftMap& psi) {
    if (I == J) return true;
    const DyadicCube pI = psi(I), pJ = psi(J);
    if (!(I.intersects(J) || I.intersects(pJ) || pI.intersects(J) || pI.intersects(pJ))) return true;
    auto in_child = [](const DyadicCube& a, const DyadicCube& b, const DyadicCube& outer) {
        if (outer.level >= a.level || outer.level >= b.level) return false;
        for (std::uint32_t pos = 0; pos < (1u << outer.dim); ++pos) {
            const DyadicCube c = outer.child(pos);
            if (c.contains(a) && c.contains(b)) return true;
        }
        return false;
    };
    return in_child(I, pI, J) || in_child(I, pI, pJ) || in_child(J, pJ, I) || in_child(J, pJ, pI);
}

inline bool compatibility_check(const DyadicCube& I, const DyadicCube& J, const ShiftMap& psi,
                                const DyadicSystem& system) {
    require(system.contains(I) && system.contains(J), "compatibility_check: cube not in the system");
    return compatibility_check(I, J, psi);
}

struct CompatibilityClass {
    int k = 0;  // a-value
    int v = 0;  // parity
    std::vector<DyadicCube> cubes;
};

struct Partition {
    int M = 0;
    std::vector<CompatibilityClass> classes;  // index 2k + v

    const CompatibilityClass& at(int k, int v) const { return classes.at(static_cast<std::size_t>(2 * k + v)); }
    std::size_t cube_count() const {
        std::size_t n = 0;
        for (const auto& c : classes) n += c.cubes.size();
        return n;
    }
};

/// Classes D_{k,v} = {I : a(I) = k, b(I) = v}, with b given per cube.
inline Partition partition(const std::vector<DyadicCube>& good, const std::vector<int>& parity, const ShiftMap& psi,
                           const BadnessParams& params) {
    require(good.size() == parity.size(), "partition: one parity per cube");
    Partition out;
    out.M = shift_complexity(psi, params);
    out.classes.resize(static_cast<std::size_t>(2 * (out.M + 1)));
    for (int k = 0; k <= out.M; ++k)
        for (int v = 0; v < 2; ++v) out.classes[static_cast<std::size_t>(2 * k + v)] = {k, v, {}};
    for (std::size_t i = 0; i < good.size(); ++i) {
        require(parity[i] == 0 || parity[i] == 1, "partition: parity must be 0 or 1");
        out.classes[static_cast<std::size_t>(2 * level_class(good[i], out.M) + parity[i])].cubes.push_back(good[i]);
    }
    for (auto& c : out.classes) std::sort(c.cubes.begin(), c.cubes.end());
    return out;
}

/// Partition with parity taken along orbits inside the given set.
inline Partition partition(const std::vector<DyadicCube>& good, const ShiftMap& psi, const BadnessParams& params) {
    return partition(good, orbit_parity(good, psi), psi, params);
}

/// Good cubes of a system on levels [from, to], with parity taken along the
/// orbits of psi through all window cubes of each level.
inline Partition partition(const DyadicSystem& system, const ShiftMap& psi, const BadnessParams& params, int from,
                           int to) {
    std::vector<DyadicCube> good;
    std::vector<int> parity;
    for (int j = from; j <= to; ++j) {
        const std::vector<DyadicCube> all = system.cubes(j);
        const std::vector<int> b = orbit_parity(all, psi);
        for (std::size_t i = 0; i < all.size(); ++i) {
            if (system.is_bad(all[i], params)) continue;
            good.push_back(all[i]);
            parity.push_back(b[i]);
        }
    }
    return partition(good, parity, psi, params);
}

struct PairCheck {
    std::int64_t pairs = 0;
    std::int64_t failures = 0;
    std::optional<std::pair<DyadicCube, DyadicCube>> first_failure;
};

/// Exhaustive pairwise m-compatibility inside one class.
inline PairCheck check_class_pairs(const CompatibilityClass& c, const ShiftMap& psi) {
    PairCheck out;
    for (std::size_t i = 0; i < c.cubes.size(); ++i)
        for (std::size_t j = i + 1; j < c.cubes.size(); ++j) {
            ++out.pairs;
            if (compatibility_check(c.cubes[i], c.cubes[j], psi)) continue;
            ++out.failures;
            if (!out.first_failure) out.first_failure = {c.cubes[i], c.cubes[j]};
        }
    return out;
}

// ---------------------------------------------------------------------------
// Difference sequences.

enum class Flavor { A, B };

/// Labels of the atoms of a finitely generated sigma-algebra on the cells of
/// a window. Refining by a function only touches the cells where it is
/// nonzero; values are compared after rounding to 1e-12.
class AtomPartition {
public:
    explicit AtomPartition(std::int64_t cells)
        : label_(static_cast<std::size_t>(cells), 0), size_{cells} {}

    const std::vector<std::int64_t>& labels() const { return label_; }
    std::int64_t label(std::int64_t cell) const { return label_[static_cast<std::size_t>(cell)]; }
    std::int64_t atom_size(std::int64_t label) const { return size_[static_cast<std::size_t>(label)]; }
    std::size_t atom_count() const {
        std::size_t n = 0;
        for (std::int64_t s : size_) n += s > 0;
        return n;
    }

    void refine(const std::vector<std::int64_t>& cells, const std::vector<double>& values) {
        std::map<std::pair<std::int64_t, long long>, std::int64_t> fresh;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const long long q = std::llround(values[k] * 1e12);
            if (q == 0) continue;
            std::int64_t& l = label_[static_cast<std::size_t>(cells[k])];
            auto [it, added] = fresh.emplace(std::make_pair(l, q), static_cast<std::int64_t>(size_.size()));
            if (added) size_.push_back(0);
            --size_[static_cast<std::size_t>(l)];
            l = it->second;
            ++size_[static_cast<std::size_t>(l)];
        }
    }

private:
    std::vector<std::int64_t> label_;
    std::vector<std::int64_t> size_;
};

/// Ordered difference functions on a window, each stored by its nonzero cells.
class DifferenceSequence {
public:
    struct Term {
        DyadicCube cube;
        int u = 0;
    };

    explicit DifferenceSequence(Window w) : window_(w) {}

    const Window& window() const { return window_; }
    std::size_t size() const { return terms_.size(); }
    const Term& term(std::size_t i) const { return terms_[i]; }
    const std::vector<std::int64_t>& support(std::size_t i) const { return cells_[i]; }
    const std::vector<double>& values(std::size_t i) const { return values_[i]; }

    /// Multipliers default to 1.
    std::vector<double> multipliers;

    void push(const GridFunction& d, Term t) {
        require(d.window() == window_ && d.value_dim() == 1, "difference sequence: function on another window");
        std::vector<std::int64_t> cells;
        std::vector<double> vals;
        for (std::int64_t c = 0; c < d.cells(); ++c)
            if (d(c) != 0.0) {
                cells.push_back(c);
                vals.push_back(d(c));
            }
        cells_.push_back(std::move(cells));
        values_.push_back(std::move(vals));
        terms_.push_back(t);
        multipliers.push_back(1.0);
    }

    GridFunction function(std::size_t i) const {
        GridFunction out(window_, 1);
        for (std::size_t k = 0; k < cells_[i].size(); ++k) out(cells_[i][k]) = values_[i][k];
        return out;
    }

    /// Atom labels of sigma(d_0, ..., d_{prefix-1}): cells carry the same label
    /// iff every earlier member takes the same value on them.
    std::vector<std::int64_t> atoms(std::size_t prefix) const;

private:
    Window window_;
    std::vector<Term> terms_;
    std::vector<std::vector<std::int64_t>> cells_;
    std::vector<std::vector<double>> values_;
};

inline std::vector<std::int64_t> DifferenceSequence::atoms(std::size_t prefix) const {
    require(prefix <= size(), "atoms: prefix longer than the sequence");
    AtomPartition a(window_.cells());
    for (std::size_t i = 0; i < prefix; ++i) a.refine(cells_[i], values_[i]);
    return a.labels();
}

/// Bounding box of I u psi(I) over a list of cubes.
inline Window covering_box(const std::vector<DyadicCube>& cubes, const ShiftMap& psi) {
    require(!cubes.empty(), "covering_box: no cubes");
    Window w{cubes.front().dim, cubes.front().fine, {}, {}};
    for (int i = 0; i < w.dim; ++i) {
        w.lo[i] = std::numeric_limits<std::int64_t>::max();
        w.hi[i] = std::numeric_limits<std::int64_t>::min();
    }
    for (const DyadicCube& q : cubes)
        for (const DyadicCube& c : {q, psi(q)})
            for (int i = 0; i < w.dim; ++i) {
                w.lo[i] = std::min(w.lo[i], c.lo(i));
                w.hi[i] = std::max(w.hi[i], c.hi(i));
            }
    return w;
}

/// Values of the two differences attached to I on one finest cell.
///   A: d_u = (h^eta_I + (-1)^u h^theta_{psi(I)}) / 2
///   B: d_0 = (h^0_{psi(I)} + (h^theta_I)^+) / 3 - (h^theta_I)^-,
///      d_1 = (-h^0_{psi(I)} + 2 (h^theta_I)^+) / 3
inline std::pair<double, double> difference_values(const DyadicCube& I, const DyadicCube& pI, std::uint32_t eta,
                                                   std::uint32_t theta, Flavor flavor, const Coord& cell) {
    if (flavor == Flavor::A) {
        const double a = haar_value({I, eta}, cell);
        const double b = haar_value({pI, theta}, cell);
        return {0.5 * (a + b), 0.5 * (a - b)};
    }
    const double h = haar_value({I, theta}, cell);
    const double hp = std::max(h, 0.0), hn = std::max(-h, 0.0);
    const double z = haar_value({pI, 0}, cell);
    return {(z + hp) / 3.0 - hn, (-z + 2.0 * hp) / 3.0};
}

/// d_{I,0}, d_{I,1} for every cube of a class, ordered by decreasing l(I)
/// (ties by corner) and then u. With `coarse_first` false the levels are
/// taken in increasing order instead, which in general breaks the
/// martingale property.
inline DifferenceSequence build_differences(const CompatibilityClass& cls, std::uint32_t eta, std::uint32_t theta,
                                            const ShiftMap& psi, Flavor flavor, const Window& window,
                                            bool coarse_first = true) {
    const std::uint32_t types = 1u << window.dim;
    require(theta != 0 && theta < types, "build_differences: theta must be a nonzero type");
    if (flavor == Flavor::A) require(eta != 0 && eta < types, "build_differences: A-type needs a nonzero eta");
    else require(eta == 0, "build_differences: B-type has eta = 0");
    std::vector<DyadicCube> order = cls.cubes;
    std::sort(order.begin(), order.end());
    if (!coarse_first)
        std::stable_sort(order.begin(), order.end(),
                         [](const DyadicCube& a, const DyadicCube& b) { return a.level > b.level; });
    DifferenceSequence seq(window);
    for (const DyadicCube& I : order) {
        require(I.dim == window.dim && I.fine == window.fine, "build_differences: cube does not match the window");
        const DyadicCube pI = psi(I);
        require(window.contains(I) && window.contains(pI), "build_differences: window must contain I and psi(I)");
        GridFunction d0(window, 1), d1(window, 1);
        for (std::int64_t c = 0; c < window.cells(); ++c) {
            const Coord cell = window.cell(c);
            if (!I.contains_point(cell) && !pI.contains_point(cell)) continue;
            const auto [v0, v1] = difference_values(I, pI, eta, theta, flavor, cell);
            d0(c) = v0;
            d1(c) = v1;
        }
        seq.push(d0, {I, 0});
        seq.push(d1, {I, 1});
    }
    return seq;
}

struct MdsReport {
    bool passed = true;
    double worst_mean = 0.0;  // largest |mean of d_i| over atoms of the earlier members
    std::optional<std::size_t> first_failure;
};

/// Checks that every d_i has mean zero on every atom of sigma(d_0..d_{i-1}).
inline MdsReport check_mds(const DifferenceSequence& seq, double tol = 1e-12) {
    MdsReport out;
    AtomPartition atoms(seq.window().cells());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        // atoms missing the support of d_i see mean zero trivially
        std::map<std::int64_t, double> sum;
        const auto& cells = seq.support(i);
        const auto& vals = seq.values(i);
        for (std::size_t k = 0; k < cells.size(); ++k) sum[atoms.label(cells[k])] += vals[k];
        for (const auto& [l, s] : sum) {
            const double mean = std::abs(s) / static_cast<double>(atoms.atom_size(l));
            out.worst_mean = std::max(out.worst_mean, mean);
            if (mean > tol && !out.first_failure) {
                out.passed = false;
                out.first_failure = i;
            }
        }
        atoms.refine(cells, vals);
    }
    return out;
}

inline bool verify_mds(const DifferenceSequence& seq, double tol = 1e-12) { return check_mds(seq, tol).passed; }

// ---------------------------------------------------------------------------
// Transforms.

/// sum_i lambda_i x_i d_i with x_i in R^d given row-wise in `values`
/// (size() * d entries). |lambda_i| must not exceed `bound`.
inline GridFunction apply_transform(const DifferenceSequence& seq, const std::vector<double>& multipliers,
                                    const std::vector<double>& values, int d, double bound = 1.0) {
    require(multipliers.size() == seq.size(), "apply_transform: one multiplier per difference");
    require(d >= 1 && values.size() == seq.size() * static_cast<std::size_t>(d), "apply_transform: bad value array");
    GridFunction out(seq.window(), d);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const double l = multipliers[i];
        if (!(std::abs(l) <= bound)) throw ParameterError("apply_transform: multiplier exceeds the declared bound");
        if (l == 0.0) continue;
        const auto& cells = seq.support(i);
        const auto& vals = seq.values(i);
        for (std::size_t k = 0; k < cells.size(); ++k)
            for (int a = 0; a < d; ++a) out(cells[k], a) += l * values[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)] * vals[k];
    }
    return out;
}

/// sum_i lambda_i d_i.
inline GridFunction apply_transform(const DifferenceSequence& seq, const std::vector<double>& multipliers,
                                    double bound = 1.0) {
    return apply_transform(seq, multipliers, std::vector<double>(seq.size(), 1.0), 1, bound);
}

/// max{p, p/(p-1)} - 1, the martingale transform constant for scalar and
/// Hilbert-space values.
inline double burkholder_constant(double p) {
    require(p > 1.0, "burkholder_constant: p must exceed 1");
    return std::max(p, p / (p - 1.0)) - 1.0;
}

enum class MultiplierLaw { Uniform, Signs };

struct NormEstimate {
    double p = 2.0;
    double value = 0.0;  // max ratio over trials
    double mean = 0.0;
    double standard_error = 0.0;
    int trials = 0;
    int skipped = 0;
};

/// Largest ||sum lambda_i x_i d_i||_p / ||sum x_i d_i||_p over random trials,
/// with x_i standard Gaussian in R^d and lambda_i uniform in [-1, 1] (or
/// random signs). Trial t uses the stream (seed, t).
inline NormEstimate estimate_transform_ratio(const DifferenceSequence& seq, double p, int d, int trials,
                                             std::uint64_t seed, MultiplierLaw law = MultiplierLaw::Uniform) {
    require(p > 1.0 && std::isfinite(p), "transform ratio: p must lie in (1, inf)");
    require(trials >= 1 && seq.size() > 0, "transform ratio: need trials and a nonempty sequence");
    NormEstimate out;
    out.p = p;
    double sum = 0.0, sum2 = 0.0;
    std::vector<double> x(seq.size() * static_cast<std::size_t>(d)), lambda(seq.size());
    for (int t = 0; t < trials; ++t) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(t));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> uniform(-1.0, 1.0);
        for (double& v : x) v = normal(rng);
        for (double& l : lambda) l = law == MultiplierLaw::Signs ? ((rng() & 1u) ? 1.0 : -1.0) : uniform(rng);
        const double den = lp_norm(apply_transform(seq, std::vector<double>(seq.size(), 1.0), x, d), p);
        if (!(den > 1e-300) || !std::isfinite(den)) {
            ++out.skipped;
            continue;
        }
        const double r = lp_norm(apply_transform(seq, lambda, x, d), p) / den;
        out.value = std::max(out.value, r);
        sum += r;
        sum2 += r * r;
        ++out.trials;
    }
    if (out.trials > 0) {
        const double n = out.trials;
        out.mean = sum / n;
        out.standard_error = n > 1 ? std::sqrt(std::max(0.0, (sum2 - n * out.mean * out.mean) / (n - 1)) / n) : 0.0;
    }
    return out;
}

}  // namespace haardyad

#endif  // HAARDYAD_MARTINGALE_HPP
