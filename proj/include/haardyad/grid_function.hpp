#ifndef HAARDYAD_GRID_FUNCTION_HPP
#define HAARDYAD_GRID_FUNCTION_HPP

#include <cmath>
#include <span>
#include <vector>

#include "haardyad/lattice.hpp"

namespace haardyad {

/// Piecewise-constant function on the finest cells of a window with values
/// in R^d. Outside the window the function is zero.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(const Window& w, int d)
        : window_(w), d_(d), values_(static_cast<std::size_t>(w.cells() * d), 0.0) {
        require(d >= 1, "grid function: value dimension must be >= 1");
    }

    const Window& window() const { return window_; }
    int value_dim() const { return d_; }
    std::int64_t cells() const { return window_.cells(); }
    double cell_volume() const { return window_.cell_volume(); }

    std::span<double> at(std::int64_t cell) {
        return {values_.data() + cell * d_, static_cast<std::size_t>(d_)};
    }
    std::span<const double> at(std::int64_t cell) const {
        return {values_.data() + cell * d_, static_cast<std::size_t>(d_)};
    }
    double& operator()(std::int64_t cell, int comp = 0) { return values_[static_cast<std::size_t>(cell * d_ + comp)]; }
    double operator()(std::int64_t cell, int comp = 0) const {
        return values_[static_cast<std::size_t>(cell * d_ + comp)];
    }
    /// Value at a finest cell given by coordinates; zero outside the window.
    double value(const Coord& cell, int comp = 0) const {
        if (!window_.contains_cell(cell)) return 0.0;
        return (*this)(window_.index(cell), comp);
    }

    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    GridFunction& operator+=(const GridFunction& o) {
        check_same(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o) {
        check_same(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
        return *this;
    }
    GridFunction& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }
    /// this += s * o
    void axpy(double s, const GridFunction& o) {
        check_same(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * o.values_[k];
    }

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

    void check_same(const GridFunction& o) const {
        if (!(window_ == o.window_) || d_ != o.d_)
            throw ParameterError("grid functions live on different windows or value spaces");
    }

private:
    Window window_{};
    int d_ = 1;
    std::vector<double> values_;
};

/// <f, g> = sum over cells of f.g times the cell volume.
inline double inner_product(const GridFunction& f, const GridFunction& g) {
    f.check_same(g);
    double s = 0.0;
    const auto& a = f.data();
    const auto& b = g.data();
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s * f.cell_volume();
}

/// Pairing of an R^d-valued f with a scalar g, componentwise.
inline std::vector<double> pair_with_scalar(const GridFunction& f, const GridFunction& g) {
    if (!(f.window() == g.window()) || g.value_dim() != 1)
        throw ParameterError("pair_with_scalar: needs a scalar function on the same window");
    std::vector<double> out(static_cast<std::size_t>(f.value_dim()), 0.0);
    for (std::int64_t c = 0; c < f.cells(); ++c) {
        const double w = g(c);
        if (w == 0.0) continue;
        for (int k = 0; k < f.value_dim(); ++k) out[static_cast<std::size_t>(k)] += f(c, k) * w;
    }
    for (double& v : out) v *= f.cell_volume();
    return out;
}

/// L^p norm with the Euclidean norm on R^d pointwise.
inline double lp_norm(const GridFunction& f, double p) {
    require(p >= 1.0, "lp_norm: p must be >= 1");
    double s = 0.0;
    for (std::int64_t c = 0; c < f.cells(); ++c) {
        double e = 0.0;
        for (double v : f.at(c)) e += v * v;
        if (e == 0.0) continue;
        s += p == 2.0 ? e : std::pow(e, 0.5 * p);
    }
    return std::pow(s * f.cell_volume(), 1.0 / p);
}

/// Indicator-weighted integral of each component.
inline std::vector<double> integral(const GridFunction& f) {
    std::vector<double> out(static_cast<std::size_t>(f.value_dim()), 0.0);
    for (std::int64_t c = 0; c < f.cells(); ++c)
        for (int k = 0; k < f.value_dim(); ++k) out[static_cast<std::size_t>(k)] += f(c, k);
    for (double& v : out) v *= f.cell_volume();
    return out;
}

inline double max_abs_difference(const GridFunction& a, const GridFunction& b) {
    a.check_same(b);
    double m = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    return m;
}

/// Copy of f on another window: values on shared cells, zero elsewhere.
inline GridFunction resample(const GridFunction& f, const Window& w) {
    if (w.dim != f.window().dim || w.fine != f.window().fine)
        throw ParameterError("resample: windows differ in dimension or resolution");
    GridFunction out(w, f.value_dim());
    for (std::int64_t c = 0; c < out.cells(); ++c) {
        const Coord cell = w.cell(c);
        if (!f.window().contains_cell(cell)) continue;
        const std::int64_t src = f.window().index(cell);
        for (int k = 0; k < f.value_dim(); ++k) out(c, k) = f(src, k);
    }
    return out;
}

/// Fills every value with an independent standard normal draw.
inline GridFunction random_grid_function(const Window& w, int d, Rng& rng) {
    GridFunction f(w, d);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : f.data()) v = normal(rng);
    return f;
}

/// Random function supported on the cells of `support` (a sub-box).
inline GridFunction random_supported_function(const Window& w, const Window& support, int d, Rng& rng) {
    GridFunction f(w, d);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::int64_t c = 0; c < f.cells(); ++c) {
        if (!support.contains_cell(w.cell(c))) continue;
        for (int k = 0; k < d; ++k) f(c, k) = normal(rng);
    }
    return f;
}

}  // namespace haardyad

#endif  // HAARDYAD_GRID_FUNCTION_HPP
