#ifndef HAARDYAD_KERNEL_HPP
#define HAARDYAD_KERNEL_HPP

// Convolution Calderon-Zygmund kernels K(x, y) = k(x - y) and the
// quadrature of their pairings against piecewise-constant functions.
//
// For two cells Q_a, Q_b of side h with index offset delta = a - b,
//   int_{Q_a} int_{Q_b} k(x - y) dy dx = int k(t) w(t) dt,
//   w(t) = prod_i (h - |t_i - delta_i h|)^+ ,
// so every cell pair reduces to an n-dimensional integral of k against a
// piecewise polynomial weight. The weight is split at its kinks; pieces that
// have the singular point t = 0 as a corner are refined geometrically toward
// it, and every other piece is split until it is admissible
// (dist(0, box) >= eta * diam(box)) and then integrated by tensor
// Gauss-Legendre of order 8.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "haardyad/grid_function.hpp"
#include "haardyad/haar.hpp"

namespace haardyad {

using Point = std::array<double, kMaxDim>;

struct CZKernel {
    std::string name;
    int dim = 1;
    double alpha = 1.0;
    double size_constant = 1.0;
    double holder_constant = 1.0;
    bool antisymmetric = true;
    std::function<double(const Point&)> profile;  // k(t), t != 0

    double operator()(const Point& t) const { return profile(t); }
    double evaluate(const Point& x, const Point& y) const {
        Point t{};
        for (int i = 0; i < dim; ++i) t[i] = x[i] - y[i];
        return profile(t);
    }
};

/// 1/(pi t).
inline CZKernel hilbert_kernel() {
    CZKernel k;
    k.name = "hilbert";
    k.dim = 1;
    k.size_constant = 1.0 / std::numbers::pi;
    k.holder_constant = 4.0 / std::numbers::pi;
    k.profile = [](const Point& t) { return 1.0 / (std::numbers::pi * t[0]); };
    return k;
}

/// Omega(t/|t|)/|t|^2 with Omega(u) = u_1, i.e. t_1/|t|^3.
inline CZKernel odd_kernel_2d() {
    CZKernel k;
    k.name = "odd2d";
    k.dim = 2;
    k.size_constant = 1.0;
    // |grad k(t)| <= 2|t|^{-3}, and |t + s h| >= |t|/2 on the segment.
    k.holder_constant = 32.0;
    k.profile = [](const Point& t) {
        const double r2 = t[0] * t[0] + t[1] * t[1];
        return t[0] / (r2 * std::sqrt(r2));
    };
    return k;
}

inline CZKernel zero_kernel(int dim) {
    require(dim >= 1 && dim <= kMaxDim, "zero kernel: dimension out of range");
    CZKernel k;
    k.name = "zero";
    k.dim = dim;
    k.size_constant = 0.0;
    k.holder_constant = 0.0;
    k.profile = [](const Point&) { return 0.0; };
    return k;
}

inline std::vector<std::string> kernel_names() { return {"hilbert", "odd2d", "zero"}; }

/// Kernel by name; `dim` is only used for the zero kernel.
inline CZKernel make_kernel(const std::string& name, int dim = 1) {
    if (name == "hilbert") return hilbert_kernel();
    if (name == "odd2d") return odd_kernel_2d();
    if (name == "zero") return zero_kernel(dim);
    throw ParameterError("unknown kernel '" + name + "' (known: hilbert, odd2d, zero)");
}

struct EstimateSpotCheck {
    double worst_size_ratio = 0.0;    // max |K| |x-y|^n / C
    double worst_holder_ratio = 0.0;  // max of the Holder quotient over C
    int samples = 0;
    // The size estimate is attained exactly on the axis, so allow rounding.
    bool pass() const { return worst_size_ratio <= 1.0 + 1e-12 && worst_holder_ratio <= 1.0; }
};

/// Samples pairs at scales 2^{-8}..2^{8} and checks both standard estimates.
inline EstimateSpotCheck spot_check_estimates(const CZKernel& K, int samples, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> scale(-8.0, 8.0);
    std::uniform_real_distribution<double> frac(0.0, 0.499);
    EstimateSpotCheck out;
    out.samples = samples;
    const int n = K.dim;
    for (int s = 0; s < samples; ++s) {
        Point x{}, y{}, h{};
        const double sc = std::exp2(scale(rng));
        double r2 = 0.0;
        for (int i = 0; i < n; ++i) {
            x[i] = sc * unit(rng);
            y[i] = sc * unit(rng);
            r2 += (x[i] - y[i]) * (x[i] - y[i]);
        }
        const double r = std::sqrt(r2);
        if (r == 0.0) continue;
        double hn = 0.0;
        for (int i = 0; i < n; ++i) {
            h[i] = unit(rng);
            hn += h[i] * h[i];
        }
        hn = std::sqrt(hn);
        const double target = frac(rng) * r;
        for (int i = 0; i < n; ++i) h[i] *= target / hn;
        const double kxy = K.evaluate(x, y);
        if (K.size_constant > 0.0)
            out.worst_size_ratio =
                std::max(out.worst_size_ratio, std::abs(kxy) * std::pow(r, n) / K.size_constant);
        else if (kxy != 0.0)
            out.worst_size_ratio = INFINITY;
        Point xh = x, yh = y;
        for (int i = 0; i < n; ++i) {
            xh[i] += h[i];
            yh[i] += h[i];
        }
        const double diff = std::abs(K.evaluate(xh, y) - kxy) + std::abs(K.evaluate(x, yh) - kxy);
        const double bound = std::pow(target, K.alpha) / std::pow(r, n + K.alpha);
        if (K.holder_constant > 0.0)
            out.worst_holder_ratio = std::max(out.worst_holder_ratio, diff / (K.holder_constant * bound));
        else if (diff != 0.0)
            out.worst_holder_ratio = INFINITY;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cell-pair quadrature.

struct QuadratureOptions {
    /// Gauss is applied once dist(0, box) >= admissibility * diam(box).
    double admissibility = 2.0;
    /// Corner refinement stops when the corner box side drops below
    /// corner_tolerance * h.
    double corner_tolerance = 1e-13;
};

namespace impl {

struct Box {
    Point lo{};
    Point hi{};
};

inline const std::array<std::pair<double, double>, 8>& gauss8() {
    static const auto nodes = [] {
        using G = boost::math::quadrature::gauss<double, 8>;
        std::array<std::pair<double, double>, 8> out{};
        const auto& x = G::abscissa();
        const auto& w = G::weights();
        for (std::size_t i = 0; i < 4; ++i) {
            out[2 * i] = {x[i], w[i]};
            out[2 * i + 1] = {-x[i], w[i]};
        }
        return out;
    }();
    return nodes;
}

}  // namespace impl

/// Integrals of the kernel over pairs of side-h cells, cached by offset.
class CellQuadrature {
public:
    CellQuadrature(CZKernel kernel, double h, QuadratureOptions opt = {})
        : K_(std::move(kernel)), h_(h), opt_(opt) {
        require(h > 0.0, "cell quadrature: cell side must be positive");
        require(opt.admissibility > 0.0 && opt.corner_tolerance > 0.0, "cell quadrature: bad options");
    }

    const CZKernel& kernel() const { return K_; }
    double h() const { return h_; }
    std::size_t cache_size() const { return cache_.size(); }

    /// int_{Q_a} int_{Q_b} K(x, y) dy dx for a - b = delta.
    double operator()(const Coord& delta) {
        bool zero = true;
        for (int i = 0; i < K_.dim; ++i) zero = zero && delta[i] == 0;
        if (zero) {
            if (K_.antisymmetric) return 0.0;
            throw UnsupportedError("principal value on identical cells needs an antisymmetric kernel");
        }
        if (K_.antisymmetric && negative(delta)) {
            Coord d = delta;
            for (int i = 0; i < K_.dim; ++i) d[i] = -d[i];
            return -(*this)(d);
        }
        auto it = cache_.find(delta);
        if (it != cache_.end()) return it->second;
        const double v = compute(delta);
        cache_.emplace(delta, v);
        return v;
    }

private:
    bool negative(const Coord& d) const {
        for (int i = 0; i < K_.dim; ++i)
            if (d[i] != 0) return d[i] < 0;
        return false;
    }

    double weight(const Point& t) const {
        double w = 1.0;
        for (int i = 0; i < K_.dim; ++i) w *= std::max(0.0, h_ - std::abs(t[i] - delta_[i] * h_));
        return w;
    }

    double gauss(const impl::Box& b) const {
        const auto& g = impl::gauss8();
        const int n = K_.dim;
        Point mid{}, half{};
        double jac = 1.0;
        for (int i = 0; i < n; ++i) {
            mid[i] = 0.5 * (b.lo[i] + b.hi[i]);
            half[i] = 0.5 * (b.hi[i] - b.lo[i]);
            jac *= half[i];
        }
        double sum = 0.0;
        int total = 1;
        for (int i = 0; i < n; ++i) total *= 8;
        for (int idx = 0; idx < total; ++idx) {
            Point t{};
            double w = 1.0;
            int r = idx;
            for (int i = 0; i < n; ++i) {
                const auto& [x, wx] = g[static_cast<std::size_t>(r % 8)];
                r /= 8;
                t[i] = mid[i] + half[i] * x;
                w *= wx;
            }
            sum += w * K_(t) * weight(t);
        }
        return sum * jac;
    }

    template <class Fn>
    void for_children(const impl::Box& b, Fn&& fn) const {
        const int n = K_.dim;
        for (std::uint32_t pos = 0; pos < (1u << n); ++pos) {
            impl::Box c = b;
            for (int i = 0; i < n; ++i) {
                const double m = 0.5 * (b.lo[i] + b.hi[i]);
                if ((pos >> i) & 1u) c.lo[i] = m;
                else c.hi[i] = m;
            }
            fn(c);
        }
    }

    double regular(const impl::Box& b) const {
        double dist2 = 0.0, diam2 = 0.0;
        for (int i = 0; i < K_.dim; ++i) {
            const double d = b.lo[i] > 0.0 ? b.lo[i] : (b.hi[i] < 0.0 ? -b.hi[i] : 0.0);
            dist2 += d * d;
            diam2 += (b.hi[i] - b.lo[i]) * (b.hi[i] - b.lo[i]);
        }
        if (dist2 >= opt_.admissibility * opt_.admissibility * diam2) return gauss(b);
        double s = 0.0;
        for_children(b, [&](const impl::Box& c) { s += regular(c); });
        return s;
    }

    bool has_zero_corner(const impl::Box& b) const {
        for (int i = 0; i < K_.dim; ++i)
            if (b.lo[i] != 0.0 && b.hi[i] != 0.0) return false;
        return true;
    }

    double corner(impl::Box b) const {
        double s = 0.0;
        while (b.hi[0] - b.lo[0] > opt_.corner_tolerance * h_) {
            impl::Box next = b;
            for_children(b, [&](const impl::Box& c) {
                if (has_zero_corner(c)) next = c;
                else s += regular(c);
            });
            b = next;
        }
        return s;
    }

    double compute(const Coord& delta) {
        delta_ = delta;
        const int n = K_.dim;
        double s = 0.0;
        // 2^n pieces between the kinks of w.
        for (std::uint32_t pos = 0; pos < (1u << n); ++pos) {
            impl::Box b;
            for (int i = 0; i < n; ++i) {
                const double c = static_cast<double>(delta[i]) * h_;
                if ((pos >> i) & 1u) {
                    b.lo[i] = c;
                    b.hi[i] = c + h_;
                } else {
                    b.lo[i] = c - h_;
                    b.hi[i] = c;
                }
            }
            s += has_zero_corner(b) ? corner(b) : regular(b);
        }
        return s;
    }

    CZKernel K_;
    double h_;
    QuadratureOptions opt_;
    Coord delta_{};
    std::map<Coord, double> cache_;
};

/// <g, T f> = sum over cell pairs g_a f_b int int K. Both functions must share
/// dimension and resolution; windows may differ. For vector values the
/// components are paired and summed.
inline double pairing(const GridFunction& g, CellQuadrature& quad, const GridFunction& f) {
    const Window& wf = f.window();
    const Window& wg = g.window();
    if (wf.dim != wg.dim || wf.fine != wg.fine || f.value_dim() != g.value_dim())
        throw ParameterError("pairing: functions differ in dimension, resolution or value space");
    if (wf.dim != quad.kernel().dim) throw ParameterError("pairing: kernel dimension mismatch");
    if (std::abs(quad.h() - wf.cell_length()) > 0.0) throw ParameterError("pairing: quadrature cell size mismatch");
    const int d = f.value_dim();
    std::vector<std::pair<Coord, std::int64_t>> fcells, gcells;
    auto nonzero = [d](const GridFunction& u, std::int64_t c) {
        for (int k = 0; k < d; ++k)
            if (u(c, k) != 0.0) return true;
        return false;
    };
    for (std::int64_t c = 0; c < f.cells(); ++c)
        if (nonzero(f, c)) fcells.emplace_back(wf.cell(c), c);
    for (std::int64_t c = 0; c < g.cells(); ++c)
        if (nonzero(g, c)) gcells.emplace_back(wg.cell(c), c);
    double s = 0.0;
    for (const auto& [ca, ia] : gcells)
        for (const auto& [cb, ib] : fcells) {
            double dot = 0.0;
            for (int k = 0; k < d; ++k) dot += g(ia, k) * f(ib, k);
            if (dot == 0.0) continue;
            Coord delta{};
            for (int i = 0; i < wf.dim; ++i) delta[i] = ca[i] - cb[i];
            s += dot * quad(delta);
        }
    return s;
}

inline double pairing(const GridFunction& g, const CZKernel& K, const GridFunction& f,
                      QuadratureOptions opt = {}) {
    CellQuadrature quad(K, f.window().cell_length(), opt);
    return pairing(g, quad, f);
}

namespace impl {

/// <h^eta_{I+m}, T h^theta_I> for a level-`level` cube, using a quadrature
/// on the children (side 2^{-level-1}). Allows (eta, theta) = (0, 0).
inline double haar_pair(CellQuadrature& quad, int level, const Coord& m, std::uint32_t eta, std::uint32_t theta) {
    const int n = quad.kernel().dim;
    double s = 0.0;
    for (std::uint32_t pa = 0; pa < (1u << n); ++pa)
        for (std::uint32_t pb = 0; pb < (1u << n); ++pb) {
            Coord delta{};
            for (int i = 0; i < n; ++i)
                delta[i] = 2 * m[i] + static_cast<std::int64_t>((pa >> i) & 1u) -
                           static_cast<std::int64_t>((pb >> i) & 1u);
            s += haar_sign(eta, pa) * haar_sign(theta, pb) * quad(delta);
        }
    return s * std::exp2(static_cast<double>(level * n));
}

}  // namespace impl

/// <h^eta_{I+m}, T h^theta_I>. The value depends on I only through its level
/// because the kernels are translation invariant.
inline double haar_coeff(const CZKernel& K, const DyadicCube& I, const Coord& m, std::uint32_t eta,
                         std::uint32_t theta, QuadratureOptions opt = {}) {
    if (eta == 0 && theta == 0) throw ParameterError("haar_coeff: (eta, theta) must not both vanish");
    if (I.dim != K.dim) throw ParameterError("haar_coeff: kernel dimension mismatch");
    CellQuadrature quad(K, 0.5 * I.length(), opt);
    return impl::haar_pair(quad, I.level, m, eta, theta);
}

// ---------------------------------------------------------------------------
// Coefficient tables.

/// <h^eta_{I+m}, T h^theta_I> for |m|_inf <= m_max and all (eta, theta),
/// I any cube of the given level. The (0, 0) slot holds the averaging pair
/// <h^0_{I+m}, T h^0_I>, which is not a Haar coefficient of T and is excluded
/// from decay statistics.
class CoeffTable {
public:
    CoeffTable() = default;
    CoeffTable(int dim, int level, int m_max, double decay_exponent)
        : dim_(dim), level_(level), m_max_(m_max), exponent_(decay_exponent) {
        require(dim >= 1 && dim <= kMaxDim, "coefficient table: dimension out of range");
        require(m_max >= 0, "coefficient table: m_max must be >= 0");
        std::size_t count = 1;
        for (int i = 0; i < dim; ++i) count *= static_cast<std::size_t>(2 * m_max + 1);
        values_.assign(count * static_cast<std::size_t>(types() * types()), 0.0);
    }

    int dim() const { return dim_; }
    int level() const { return level_; }
    int m_max() const { return m_max_; }
    int types() const { return 1 << dim_; }
    /// n + alpha of the kernel the table was computed from.
    double decay_exponent() const { return exponent_; }
    std::size_t translates() const { return values_.size() / static_cast<std::size_t>(types() * types()); }

    bool in_range(const Coord& m) const {
        for (int i = 0; i < dim_; ++i)
            if (m[i] < -m_max_ || m[i] > m_max_) return false;
        return true;
    }
    Coord translate(std::size_t idx) const {
        Coord m{};
        for (int i = dim_ - 1; i >= 0; --i) {
            m[i] = static_cast<std::int64_t>(idx % static_cast<std::size_t>(2 * m_max_ + 1)) - m_max_;
            idx /= static_cast<std::size_t>(2 * m_max_ + 1);
        }
        return m;
    }
    std::size_t index(const Coord& m) const {
        std::size_t idx = 0;
        for (int i = 0; i < dim_; ++i)
            idx = idx * static_cast<std::size_t>(2 * m_max_ + 1) + static_cast<std::size_t>(m[i] + m_max_);
        return idx;
    }
    double& at(std::size_t midx, std::uint32_t eta, std::uint32_t theta) {
        return values_[(midx * static_cast<std::size_t>(types()) + eta) * static_cast<std::size_t>(types()) + theta];
    }
    double at(std::size_t midx, std::uint32_t eta, std::uint32_t theta) const {
        return values_[(midx * static_cast<std::size_t>(types()) + eta) * static_cast<std::size_t>(types()) + theta];
    }
    double& at(const Coord& m, std::uint32_t eta, std::uint32_t theta) { return at(index(m), eta, theta); }
    double at(const Coord& m, std::uint32_t eta, std::uint32_t theta) const {
        if (!in_range(m)) throw RangeError("coefficient table: translate outside |m| <= m_max");
        return at(index(m), eta, theta);
    }

    /// max over (eta, theta) != (0, 0) of |entry|.
    double max_abs(std::size_t midx) const {
        double v = 0.0;
        for (std::uint32_t e = 0; e < static_cast<std::uint32_t>(types()); ++e)
            for (std::uint32_t t = 0; t < static_cast<std::uint32_t>(types()); ++t)
                if (e != 0 || t != 0) v = std::max(v, std::abs(at(midx, e, t)));
        return v;
    }

private:
    int dim_ = 1;
    int level_ = 0;
    int m_max_ = 0;
    double exponent_ = 2.0;
    std::vector<double> values_;
};

inline double norm2(const Coord& m, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += static_cast<double>(m[i]) * static_cast<double>(m[i]);
    return std::sqrt(s);
}

inline std::int64_t norm_inf(const Coord& m, int dim) {
    std::int64_t s = 0;
    for (int i = 0; i < dim; ++i) s = std::max<std::int64_t>(s, m[i] < 0 ? -m[i] : m[i]);
    return s;
}

inline CoeffTable coefficient_table(CellQuadrature& quad, int level, int m_max) {
    const CZKernel& K = quad.kernel();
    require(std::abs(quad.h() - std::ldexp(1.0, -level - 1)) == 0.0,
            "coefficient_table: quadrature must use the children of level-j cubes");
    CoeffTable t(K.dim, level, m_max, K.dim + K.alpha);
    for (std::size_t k = 0; k < t.translates(); ++k) {
        const Coord m = t.translate(k);
        for (std::uint32_t e = 0; e < static_cast<std::uint32_t>(t.types()); ++e)
            for (std::uint32_t th = 0; th < static_cast<std::uint32_t>(t.types()); ++th)
                t.at(k, e, th) = impl::haar_pair(quad, level, m, e, th);
    }
    return t;
}

inline CoeffTable coefficient_table(const CZKernel& K, int level, int m_max, QuadratureOptions opt = {}) {
    CellQuadrature quad(K, std::ldexp(1.0, -level - 1), opt);
    return coefficient_table(quad, level, m_max);
}

/// CSV rows: m..., eta..., theta..., value; the (0, 0) slot is omitted.
inline void write_table_csv(std::ostream& os, const CoeffTable& t) {
    for (int i = 0; i < t.dim(); ++i) os << (i ? "," : "") << "m" << i;
    for (int i = 0; i < t.dim(); ++i) os << ",eta" << i;
    for (int i = 0; i < t.dim(); ++i) os << ",theta" << i;
    os << ",value\n";
    os.precision(17);
    for (std::size_t k = 0; k < t.translates(); ++k) {
        const Coord m = t.translate(k);
        for (std::uint32_t e = 0; e < static_cast<std::uint32_t>(t.types()); ++e)
            for (std::uint32_t th = 0; th < static_cast<std::uint32_t>(t.types()); ++th) {
                if (e == 0 && th == 0) continue;
                for (int i = 0; i < t.dim(); ++i) os << (i ? "," : "") << m[i];
                for (int i = 0; i < t.dim(); ++i) os << ',' << ((e >> i) & 1u);
                for (int i = 0; i < t.dim(); ++i) os << ',' << ((th >> i) & 1u);
                os << ',' << t.at(k, e, th) << '\n';
            }
    }
}

// ---------------------------------------------------------------------------
// Decay and summability.

struct DecayPoint {
    int shell = 0;      // |m|_inf
    double x = 0.0;     // 1 + |m|_2 at the maximizing translate
    double value = 0.0; // max over the shell and over (eta, theta)
};

struct DecayReport {
    CoeffTable table;
    std::vector<DecayPoint> points;
    /// Least-squares slope of log(max) against log|m| at the shell maxima.
    double fitted_slope = 0.0;
    double fitted_intercept = 0.0;
    /// Same regression against log(1 + |m|); biased steeper by the offset at
    /// small m, reported for comparison.
    double slope_offset = 0.0;
    /// sup over the table of |c| (1 + |m|_2)^{n + alpha}, m != 0.
    double fitted_constant = 0.0;
};

namespace impl {

inline std::pair<double, double> loglog_fit(const std::vector<std::pair<double, double>>& pts) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double N = static_cast<double>(pts.size());
    for (const auto& [x, y] : pts) {
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double slope = (N * sxy - sx * sy) / (N * sxx - sx * sx);
    return {slope, (sy - slope * sx) / N};
}

}  // namespace impl

/// Shell maxima over 1..m_max and their log-log regressions; shells whose
/// maximum vanishes are skipped.
inline void fit_decay(DecayReport& r) {
    const CoeffTable& t = r.table;
    std::vector<DecayPoint> pts(static_cast<std::size_t>(t.m_max()));
    for (int s = 1; s <= t.m_max(); ++s) pts[static_cast<std::size_t>(s - 1)].shell = s;
    r.fitted_constant = 0.0;
    for (std::size_t k = 0; k < t.translates(); ++k) {
        const Coord m = t.translate(k);
        const auto s = norm_inf(m, t.dim());
        if (s == 0) continue;
        const double v = t.max_abs(k);
        const double x = 1.0 + norm2(m, t.dim());
        r.fitted_constant = std::max(r.fitted_constant, v * std::pow(x, t.decay_exponent()));
        DecayPoint& p = pts[static_cast<std::size_t>(s - 1)];
        if (v > p.value) {
            p.value = v;
            p.x = x;
        }
    }
    r.points.clear();
    for (const auto& p : pts)
        if (p.value > 0.0) r.points.push_back(p);
    r.fitted_slope = r.fitted_intercept = r.slope_offset = 0.0;
    if (r.points.size() < 2) return;
    std::vector<std::pair<double, double>> plain, offset;
    for (const auto& p : r.points) {
        plain.emplace_back(p.x - 1.0, p.value);
        offset.emplace_back(p.x, p.value);
    }
    std::tie(r.fitted_slope, r.fitted_intercept) = impl::loglog_fit(plain);
    r.slope_offset = impl::loglog_fit(offset).first;
}

inline DecayReport decay_check(const CZKernel& K, int level, int m_max, QuadratureOptions opt = {}) {
    require(m_max >= 8, "decay_check: m_max must be >= 8");
    DecayReport r;
    r.table = coefficient_table(K, level, m_max, opt);
    fit_decay(r);
    return r;
}

inline DecayReport decay_check(const CZKernel& K, const DyadicCube& I, int m_max, QuadratureOptions opt = {}) {
    if (I.dim != K.dim) throw ParameterError("decay_check: kernel dimension mismatch");
    return decay_check(K, I.level, m_max, opt);
}

/// sum over |m|_inf > M of (1 + log2^+ |m|)^w (1 + |m|)^{-s}, bounded above:
/// shells M+1..R summed explicitly (shell size <= 2n(2r+1)^{n-1},
/// |m|_2 in [r, sqrt(n) r]) and an integral bound beyond R.
inline double shell_tail_bound(int dim, int M, double s, bool log_weight) {
    const double sn = std::sqrt(static_cast<double>(dim));
    auto weight = [&](double r) { return log_weight ? 1.0 + std::max(0.0, std::log2(sn * r)) : 1.0; };
    const std::int64_t R = std::max<std::int64_t>(4096, 64 * static_cast<std::int64_t>(M));
    double total = 0.0;
    for (std::int64_t r = M + 1; r <= R; ++r) {
        const double rr = static_cast<double>(r);
        total += 2.0 * dim * std::pow(2.0 * rr + 1.0, dim - 1) * weight(rr) * std::pow(1.0 + rr, -s);
    }
    // Beyond R: term <= c (a + log2 x) x^{n-1-s} with x = 1 + r, c = 2n 2^{n-1},
    // a = 1 + log2 sqrt(n); requires s > n.
    const double e = s - dim;  // > 0
    const double c = 2.0 * dim * std::pow(2.0, dim - 1);
    const double x = static_cast<double>(R) + 1.0;
    const double a = log_weight ? 1.0 + std::log2(sn) : 1.0;
    double tail = a * std::pow(x, -e) / e;
    if (log_weight) tail += std::pow(x, -e) * (std::log(x) / e + 1.0 / (e * e)) / std::numbers::ln2;
    return total + c * tail;
}

struct SummabilityReport {
    double partial = 0.0;     // explicit sum over the table
    double tail_bound = 0.0;  // fitted envelope summed beyond m_max
    double total = 0.0;
    double envelope = 0.0;    // constant used for the tail
};

/// sum_m (1 + log2^+ |m|) max_{eta,theta} |c(m)| over the table plus the tail
/// bound from the fitted envelope C (1 + |m|)^{-(n+alpha)}.
inline SummabilityReport summability_check(const CoeffTable& t) {
    SummabilityReport r;
    DecayReport d;
    d.table = t;
    fit_decay(d);
    r.envelope = d.fitted_constant;
    for (std::size_t k = 0; k < t.translates(); ++k) {
        const double nm = norm2(t.translate(k), t.dim());
        const double w = 1.0 + (nm > 1.0 ? std::log2(nm) : 0.0);
        r.partial += w * t.max_abs(k);
    }
    r.tail_bound = r.envelope * shell_tail_bound(t.dim(), t.m_max(), t.decay_exponent(), true);
    r.total = r.partial + r.tail_bound;
    return r;
}

}  // namespace haardyad

#endif  // HAARDYAD_KERNEL_HPP
