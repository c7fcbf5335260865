#ifndef HAARDYAD_HAAR_HPP
#define HAARDYAD_HAAR_HPP

// Tensor Haar system on a shifted dyadic system.
//
// Convention: h^1_I = |I|^{-1/2} (1_{I+} - 1_{I-}) with I+ the LEFT half, so
// the lower half along every axis with theta_i = 1 carries the plus sign.

#include <bit>
#include <cmath>
#include <ostream>
#include <vector>

#include "haardyad/grid_function.hpp"

namespace haardyad {

struct HaarIndex {
    DyadicCube cube;
    std::uint32_t theta = 0;  // bit i set = oscillating factor along axis i
};

/// Sign of h^theta on the child with position bits `pos`.
constexpr double haar_sign(std::uint32_t theta, std::uint32_t pos) {
    return (std::popcount(theta & pos) & 1) ? -1.0 : 1.0;
}

/// |I|^{-1/2} for a level-j cube in dimension n.
inline double haar_magnitude(int level, int dim) { return std::exp2(0.5 * level * dim); }

/// Value of h^theta_I on the finest cell with corner `cell`.
inline double haar_value(const HaarIndex& h, const Coord& cell) {
    const DyadicCube& q = h.cube;
    if (!q.contains_point(cell)) return 0.0;
    const std::int64_t half = q.side() / 2;
    double v = haar_magnitude(q.level, q.dim);
    for (int i = 0; i < q.dim; ++i) {
        if (!((h.theta >> i) & 1u)) continue;
        if (half == 0) throw ParameterError("haar_value: cancellative function on a finest cell");
        if (cell[i] - q.lo(i) >= half) v = -v;
    }
    return v;
}

/// Haar function sampled on a window.
inline GridFunction haar_function(const HaarIndex& h, const Window& w) {
    GridFunction f(w, 1);
    for (std::int64_t c = 0; c < f.cells(); ++c) f(c) = haar_value(h, w.cell(c));
    return f;
}

/// <h, f> for a single Haar function, summing only the cells of the cube that
/// lie in the window. Works for any cube at a level not finer than the window.
inline double haar_coefficient(const GridFunction& f, const HaarIndex& h, int comp = 0) {
    const Window& w = f.window();
    const DyadicCube& q = h.cube;
    if (q.dim != w.dim || q.fine != w.fine) throw ParameterError("haar_coefficient: cube does not match the window");
    Coord lo{}, hi{};
    for (int i = 0; i < q.dim; ++i) {
        lo[i] = std::max(q.lo(i), w.lo[i]);
        hi[i] = std::min(q.hi(i), w.hi[i]);
        if (lo[i] >= hi[i]) return 0.0;
    }
    double s = 0.0;
    Coord c = lo;
    while (true) {
        s += haar_value(h, c) * f(w.index(c), comp);
        int i = q.dim - 1;
        while (i >= 0 && c[i] + 1 == hi[i]) {
            c[i] = lo[i];
            --i;
        }
        if (i < 0) break;
        ++c[i];
    }
    return s * w.cell_volume();
}

/// Coefficients <h^theta_I, f> for cancellative theta on levels jmin..jmax-1,
/// together with the averages <h^0_I, f> on the same levels. Only the
/// coarsest averages belong to the orthonormal basis; the finer ones are kept
/// because the operator expansions use them.
class HaarCoefficients {
public:
    HaarCoefficients() = default;
    HaarCoefficients(const DyadicSystem& system, int d) : dim_(system.dim()), d_(d) {
        jmin_ = system.jmin();
        jmax_ = system.jmax();
        for (int j = jmin_; j <= jmax_; ++j) {
            grids_.push_back(system.level_grid(j));
            const auto cubes = static_cast<std::size_t>(grids_.back().size());
            averages_.emplace_back(cubes * static_cast<std::size_t>(d), 0.0);
            details_.emplace_back(j < jmax_ ? cubes * static_cast<std::size_t>(thetas() * d) : 0, 0.0);
        }
    }

    int dim() const { return dim_; }
    int value_dim() const { return d_; }
    int jmin() const { return jmin_; }
    int jmax() const { return jmax_; }
    int thetas() const { return (1 << dim_) - 1; }

    const LevelGrid& grid(int level) const { return grids_[static_cast<std::size_t>(level - jmin_)]; }

    /// Coefficient by dense cube index; theta == 0 addresses the average.
    double& at(int level, std::int64_t cube, std::uint32_t theta, int comp = 0) {
        const auto l = static_cast<std::size_t>(level - jmin_);
        if (theta == 0) return averages_[l][static_cast<std::size_t>(cube * d_ + comp)];
        return details_[l][static_cast<std::size_t>((cube * thetas() + (theta - 1)) * d_ + comp)];
    }
    double at(int level, std::int64_t cube, std::uint32_t theta, int comp = 0) const {
        return const_cast<HaarCoefficients*>(this)->at(level, cube, theta, comp);
    }

    /// Coefficient of an arbitrary cube of the system; zero if the cube does
    /// not meet the window (the function vanishes there).
    double lookup(const DyadicCube& q, std::uint32_t theta, int comp = 0) const {
        if (q.level < jmin_ || q.level > jmax_ || (theta != 0 && q.level == jmax_)) return 0.0;
        const std::int64_t k = grid(q.level).index(q);
        return k < 0 ? 0.0 : at(q.level, k, theta, comp);
    }
    double lookup(const HaarIndex& h, int comp = 0) const { return lookup(h.cube, h.theta, comp); }

    /// Squared l2 mass of the basis coefficients (coarse averages plus all
    /// cancellative coefficients).
    double mass() const {
        double s = 0.0;
        for (double v : averages_.front()) s += v * v;
        for (int j = jmin_; j < jmax_; ++j)
            for (double v : details_[static_cast<std::size_t>(j - jmin_)]) s += v * v;
        return s;
    }

    void zero() {
        for (auto& a : averages_) std::fill(a.begin(), a.end(), 0.0);
        for (auto& a : details_) std::fill(a.begin(), a.end(), 0.0);
    }

    /// Applies `fn(level, cube_index, theta, comp, value&)` to every
    /// cancellative coefficient.
    template <class Fn>
    void for_each_detail(Fn&& fn) {
        for (int j = jmin_; j < jmax_; ++j) {
            const LevelGrid& g = grid(j);
            for (std::int64_t k = 0; k < g.size(); ++k)
                for (std::uint32_t t = 1; t <= static_cast<std::uint32_t>(thetas()); ++t)
                    for (int c = 0; c < d_; ++c) fn(j, k, t, c, at(j, k, t, c));
        }
    }

private:
    int dim_ = 1;
    int d_ = 1;
    int jmin_ = 0;
    int jmax_ = 0;
    std::vector<LevelGrid> grids_;
    std::vector<std::vector<double>> averages_;
    std::vector<std::vector<double>> details_;
};

namespace impl {

inline void check_window(const GridFunction& f, const DyadicSystem& system) {
    if (!(f.window() == system.window()))
        throw ParameterError("grid function window does not match the system window");
}

/// Integrals of f over every cube meeting the window, level by level
/// (index level - jmin), computed bottom-up.
inline std::vector<std::vector<double>> cube_integrals(const GridFunction& f, const DyadicSystem& system) {
    check_window(f, system);
    const int d = f.value_dim();
    const int n = system.dim();
    std::vector<std::vector<double>> ints(static_cast<std::size_t>(system.jmax() - system.jmin() + 1));
    const LevelGrid top = system.level_grid(system.jmax());
    auto& finest = ints.back();
    finest.assign(static_cast<std::size_t>(top.size() * d), 0.0);
    const Window& w = system.window();
    for (std::int64_t c = 0; c < f.cells(); ++c) {
        const std::int64_t k = top.index_of_cell(w.cell(c));
        for (int comp = 0; comp < d; ++comp)
            finest[static_cast<std::size_t>(k * d + comp)] = f(c, comp) * w.cell_volume();
    }
    for (int j = system.jmax() - 1; j >= system.jmin(); --j) {
        const LevelGrid g = system.level_grid(j);
        const LevelGrid gc = system.level_grid(j + 1);
        const auto& child = ints[static_cast<std::size_t>(j + 1 - system.jmin())];
        auto& cur = ints[static_cast<std::size_t>(j - system.jmin())];
        cur.assign(static_cast<std::size_t>(g.size() * d), 0.0);
        for (std::int64_t k = 0; k < g.size(); ++k) {
            const DyadicCube q = g.cube(k);
            for (std::uint32_t pos = 0; pos < (1u << n); ++pos) {
                const std::int64_t kc = gc.index(q.child(pos));
                if (kc < 0) continue;
                for (int comp = 0; comp < d; ++comp)
                    cur[static_cast<std::size_t>(k * d + comp)] += child[static_cast<std::size_t>(kc * d + comp)];
            }
        }
    }
    return ints;
}

}  // namespace impl

/// Fast Haar analysis by bottom-up aggregation, O(cells * 2^n) per level.
inline HaarCoefficients analyze(const GridFunction& f, const DyadicSystem& system) {
    const auto ints = impl::cube_integrals(f, system);
    const int d = f.value_dim();
    const int n = system.dim();
    HaarCoefficients out(system, d);
    for (int j = system.jmin(); j <= system.jmax(); ++j) {
        const LevelGrid& g = out.grid(j);
        const auto& cur = ints[static_cast<std::size_t>(j - system.jmin())];
        const double mag = haar_magnitude(j, n);
        for (std::int64_t k = 0; k < g.size(); ++k)
            for (int comp = 0; comp < d; ++comp)
                out.at(j, k, 0, comp) = mag * cur[static_cast<std::size_t>(k * d + comp)];
        if (j == system.jmax()) continue;
        const LevelGrid& gc = out.grid(j + 1);
        const auto& child = ints[static_cast<std::size_t>(j + 1 - system.jmin())];
        for (std::int64_t k = 0; k < g.size(); ++k) {
            const DyadicCube q = g.cube(k);
            for (std::uint32_t pos = 0; pos < (1u << n); ++pos) {
                const std::int64_t kc = gc.index(q.child(pos));
                if (kc < 0) continue;
                for (std::uint32_t t = 1; t < (1u << n); ++t) {
                    const double s = haar_sign(t, pos) * mag;
                    for (int comp = 0; comp < d; ++comp)
                        out.at(j, k, t, comp) += s * child[static_cast<std::size_t>(kc * d + comp)];
                }
            }
        }
    }
    return out;
}

/// Inverse transform from the coarse averages and the cancellative
/// coefficients; finer averages are ignored.
inline GridFunction synthesize(const HaarCoefficients& c, const DyadicSystem& system) {
    if (c.jmin() != system.jmin() || c.jmax() != system.jmax() || c.dim() != system.dim())
        throw ParameterError("synthesize: coefficient levels do not match the system");
    const int d = c.value_dim();
    const int n = system.dim();
    // Averages of the synthesized function over the cubes of the current level.
    LevelGrid g = c.grid(system.jmin());
    std::vector<double> avg(static_cast<std::size_t>(g.size() * d));
    for (std::int64_t k = 0; k < g.size(); ++k)
        for (int comp = 0; comp < d; ++comp)
            avg[static_cast<std::size_t>(k * d + comp)] =
                c.at(system.jmin(), k, 0, comp) * haar_magnitude(system.jmin(), n);
    for (int j = system.jmin(); j < system.jmax(); ++j) {
        const LevelGrid& gc = c.grid(j + 1);
        std::vector<double> next(static_cast<std::size_t>(gc.size() * d), 0.0);
        const double mag = haar_magnitude(j, n);
        for (std::int64_t kc = 0; kc < gc.size(); ++kc) {
            const DyadicCube child = gc.cube(kc);
            const DyadicCube parent = cube_containing(child.corner, j, system.shift());
            const std::int64_t k = g.index(parent);
            std::uint32_t pos = 0;
            for (int i = 0; i < n; ++i)
                if (child.corner[i] != parent.corner[i]) pos |= 1u << i;
            for (int comp = 0; comp < d; ++comp) {
                double v = avg[static_cast<std::size_t>(k * d + comp)];
                for (std::uint32_t t = 1; t < (1u << n); ++t) v += haar_sign(t, pos) * mag * c.at(j, k, t, comp);
                next[static_cast<std::size_t>(kc * d + comp)] = v;
            }
        }
        avg = std::move(next);
        g = gc;
    }
    GridFunction f(system.window(), d);
    const Window& w = system.window();
    for (std::int64_t cell = 0; cell < f.cells(); ++cell) {
        const std::int64_t k = g.index_of_cell(w.cell(cell));
        for (int comp = 0; comp < d; ++comp) f(cell, comp) = avg[static_cast<std::size_t>(k * d + comp)];
    }
    return f;
}

/// Conditional expectation E_j: cellwise average over the containing level-j
/// cube (the function is zero outside the window). The result is E_j f
/// restricted to the window, so the tower property needs a covering window.
inline GridFunction project(const GridFunction& f, int level, const DyadicSystem& system) {
    if (level < system.jmin() || level > system.jmax())
        throw RangeError("project: level outside the system range");
    const auto ints = impl::cube_integrals(f, system);
    const LevelGrid g = system.level_grid(level);
    const auto& cur = ints[static_cast<std::size_t>(level - system.jmin())];
    const double inv_vol = std::exp2(static_cast<double>(level * system.dim()));
    GridFunction out(f.window(), f.value_dim());
    const Window& w = f.window();
    for (std::int64_t c = 0; c < out.cells(); ++c) {
        const std::int64_t k = g.index_of_cell(w.cell(c));
        for (int comp = 0; comp < f.value_dim(); ++comp)
            out(c, comp) = cur[static_cast<std::size_t>(k * f.value_dim() + comp)] * inv_vol;
    }
    return out;
}

/// Martingale difference D_j f = E_{j+1} f - E_j f.
inline GridFunction detail(const GridFunction& f, int level, const DyadicSystem& system) {
    if (level < system.jmin() || level + 1 > system.jmax())
        throw RangeError("detail: levels j and j+1 must lie in the system range");
    return project(f, level + 1, system) - project(f, level, system);
}

/// CSV rows: level, corner (finest units), theta bits, value components.
inline void write_coefficients_csv(std::ostream& os, const HaarCoefficients& c) {
    os << "level";
    for (int i = 0; i < c.dim(); ++i) os << ",corner" << i;
    for (int i = 0; i < c.dim(); ++i) os << ",theta" << i;
    for (int k = 0; k < c.value_dim(); ++k) os << ",value" << k;
    os << '\n';
    os.precision(17);
    auto row = [&](int j, std::int64_t k, std::uint32_t t) {
        const DyadicCube q = c.grid(j).cube(k);
        os << j;
        for (int i = 0; i < c.dim(); ++i) os << ',' << q.corner[i];
        for (int i = 0; i < c.dim(); ++i) os << ',' << ((t >> i) & 1u);
        for (int comp = 0; comp < c.value_dim(); ++comp) os << ',' << c.at(j, k, t, comp);
        os << '\n';
    };
    const LevelGrid& g0 = c.grid(c.jmin());
    for (std::int64_t k = 0; k < g0.size(); ++k) row(c.jmin(), k, 0);
    for (int j = c.jmin(); j < c.jmax(); ++j)
        for (std::int64_t k = 0; k < c.grid(j).size(); ++k)
            for (std::uint32_t t = 1; t <= static_cast<std::uint32_t>(c.thetas()); ++t) row(j, k, t);
}

}  // namespace haardyad

#endif  // HAARDYAD_HAAR_HPP
