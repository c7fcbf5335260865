#ifndef HAARDYAD_BOURGAIN_HPP
#define HAARDYAD_BOURGAIN_HPP

// Translations of band-limited functions: the exact smoothing identity for
// averaged dyadic translates, the tent kernel and its transform, the cutoff
// multipliers, and randomized-norm experiments.
//
// Scale: level-j cubes have side l_j = 2^{-j}; f_j has spectrum in the ball
// of radius 1/(2 l_j); translations are by l_j y_j and the multipliers act as
// sigma_j(l_j xi).

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

#include "haardyad/haar.hpp"

namespace haardyad {

using RealVec = std::array<double, kMaxDim>;

// ---------------------------------------------------------------------------
// Tent kernel.

/// phi(x) = prod (1 - |x_i|)^+, the autocorrelation of the unit cube indicator.
inline double tent(const RealVec& x, int dim) {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= std::max(0.0, 1.0 - std::abs(x[i]));
    return v;
}

inline double sinc_pi(double x) {
    if (x == 0.0) return 1.0;
    const double a = std::numbers::pi * x;
    return std::sin(a) / a;
}

/// phi^(xi) = prod sinc^2(pi xi_i).
inline double tent_hat(const RealVec& xi, int dim) {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) {
        const double s = sinc_pi(xi[i]);
        v *= s * s;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Smoothing identity on a finite window.

namespace impl {

/// Cell averages of the projection onto cubes [e_k, e_k + K), e_k = g + v + kK
/// (cell units, 0 <= v <= 1), for a line of cell values that is zero outside
/// [0, N). The cell c = g mod K contains the edge at c + v; at v = 0 or 1 one
/// of its two pieces is empty, so the result is a polynomial in v.
inline void projection_line(const std::vector<double>& in, std::vector<double>& out, std::int64_t K, std::int64_t g,
                            double v) {
    const std::int64_t N = static_cast<std::int64_t>(in.size());
    std::vector<double> F(static_cast<std::size_t>(N + 1), 0.0);
    for (std::int64_t c = 0; c < N; ++c) F[static_cast<std::size_t>(c + 1)] = F[static_cast<std::size_t>(c)] + in[static_cast<std::size_t>(c)];
    auto prim = [&](std::int64_t base, double frac) {  // integral of the line over (-inf, base + frac)
        if (base < 0) return 0.0;
        if (base >= N) return F.back();
        return F[static_cast<std::size_t>(base)] + frac * in[static_cast<std::size_t>(base)];
    };
    // cube starting at integer cell b plus fraction v
    auto avg = [&](std::int64_t b) { return (prim(b + K, v) - prim(b, v)) / static_cast<double>(K); };
    out.assign(static_cast<std::size_t>(N), 0.0);
    for (std::int64_t c = 0; c < N; ++c) {
        const std::int64_t r = mod_floor(c - g, K);
        if (r == 0) out[static_cast<std::size_t>(c)] = v * avg(c - K) + (1.0 - v) * avg(c);
        else out[static_cast<std::size_t>(c)] = avg(c - r);
    }
}

/// Average over the sub-cell offset v in [0, 1): Simpson's rule, exact since
/// the cell averages are quadratic in v.
inline void averaged_projection_line(const std::vector<double>& in, std::vector<double>& out, std::int64_t K,
                                     std::int64_t g) {
    std::vector<double> a, b, c;
    projection_line(in, a, K, g, 0.0);
    projection_line(in, b, K, g, 0.5);
    projection_line(in, c, K, g, 1.0);
    out.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = (a[i] + 4.0 * b[i] + c[i]) / 6.0;
}

/// W(d) = int_{-1}^{1} (1 - |t|) K^{-1} phi((d + t)/K) dt: the cell-average
/// weight of the tent of half-width K cells. The kinks sit at integers, so
/// Simpson's rule on [-1, 0] and [0, 1] is exact.
inline std::vector<double> tent_cell_weights(std::int64_t K) {
    auto integrand = [K](double d, double t) {
        const double x = (d + t) / static_cast<double>(K);
        return (1.0 - std::abs(t)) * std::max(0.0, 1.0 - std::abs(x)) / static_cast<double>(K);
    };
    std::vector<double> w(static_cast<std::size_t>(2 * K + 1));
    for (std::int64_t d = -K; d <= K; ++d) {
        const double dd = static_cast<double>(d);
        const double left = (integrand(dd, -1.0) + 4.0 * integrand(dd, -0.5) + integrand(dd, 0.0)) / 6.0;
        const double right = (integrand(dd, 0.0) + 4.0 * integrand(dd, 0.5) + integrand(dd, 1.0)) / 6.0;
        w[static_cast<std::size_t>(d + K)] = left + right;
    }
    return w;
}

inline void convolve_line(const std::vector<double>& in, std::vector<double>& out, const std::vector<double>& w) {
    const std::int64_t N = static_cast<std::int64_t>(in.size());
    const std::int64_t K = (static_cast<std::int64_t>(w.size()) - 1) / 2;
    out.assign(in.size(), 0.0);
    for (std::int64_t c = 0; c < N; ++c) {
        double s = 0.0;
        for (std::int64_t d = -K; d <= K; ++d) {
            const std::int64_t src = c - d;
            if (src < 0 || src >= N) continue;
            s += w[static_cast<std::size_t>(d + K)] * in[static_cast<std::size_t>(src)];
        }
        out[static_cast<std::size_t>(c)] = s;
    }
}

/// Applies a line operator along one axis of every component.
template <class Op>
GridFunction along_axis(const GridFunction& f, int axis, Op&& op) {
    const Window& w = f.window();
    GridFunction out(w, f.value_dim());
    const std::int64_t n = w.extent(axis);
    std::int64_t stride = 1;
    for (int i = w.dim - 1; i > axis; --i) stride *= w.extent(i);
    std::vector<double> line(static_cast<std::size_t>(n)), res;
    for (std::int64_t start = 0; start < w.cells(); ++start) {
        if ((start / stride) % n != 0) continue;  // first cell of a line
        for (int comp = 0; comp < f.value_dim(); ++comp) {
            for (std::int64_t k = 0; k < n; ++k) line[static_cast<std::size_t>(k)] = f(start + k * stride, comp);
            op(line, res);
            for (std::int64_t k = 0; k < n; ++k) out(start + k * stride, comp) = res[static_cast<std::size_t>(k)];
        }
    }
    return out;
}

/// out(c) = f(c - shift), zero where the source is outside the window.
inline GridFunction shift_cells(const GridFunction& f, const Coord& shift) {
    const Window& w = f.window();
    GridFunction out(w, f.value_dim());
    for (std::int64_t c = 0; c < w.cells(); ++c) {
        Coord src = w.cell(c);
        for (int i = 0; i < w.dim; ++i) src[i] -= shift[i];
        if (!w.contains_cell(src)) continue;
        const std::int64_t s = w.index(src);
        for (int k = 0; k < f.value_dim(); ++k) out(c, k) = f(s, k);
    }
    return out;
}

}  // namespace impl

struct SmoothingResult {
    GridFunction averaged;     // E_beta sum_I h^0_{I+m} <h^0_I, f>, cell averages
    GridFunction convolution;  // (phi_{l} * f)(. - l m), cell averages
    std::uint64_t states = 0;
    double max_deviation() const { return max_abs_difference(averaged, convolution); }
};

/// Both sides of E_beta sum_{I in D_j} h^0_{I+m} <h^0_I, f> = (phi_{2^j} * f)(. - 2^{-j} m)
/// for a function on a window of resolution `fine`. The expectation over
/// the shift bits of levels j+1..fine is enumerated exactly; the bits below
/// the window resolution make the offset uniform inside a finest cell, and
/// that part is integrated analytically.
inline SmoothingResult smoothing_average(const GridFunction& f, int j, const Coord& m, int enumerate,
                                         std::uint64_t limit = std::uint64_t{1} << 20) {
    const Window& w = f.window();
    require(enumerate == w.fine - j && enumerate >= 1,
            "smoothing_average: the enumerated levels must be exactly j+1..fine");
    const std::int64_t K = pow2(w.fine - j);
    Coord shift{};
    for (int i = 0; i < w.dim; ++i) {
        shift[i] = m[i] * K;
        const std::int64_t margin = (std::abs(m[i]) + 1) * K;
        for (std::int64_t c = 0; c < w.cells(); ++c) {
            const Coord cell = w.cell(c);
            if (cell[i] - w.lo[i] >= margin && w.hi[i] - 1 - cell[i] >= margin) continue;
            for (int k = 0; k < f.value_dim(); ++k)
                if (f(c, k) != 0.0) throw ParameterError("smoothing_average: f must vanish within (|m|+1) 2^{-j} of the window edge");
        }
    }
    SmoothingResult out;
    out.averaged = GridFunction(w, f.value_dim());
    const ShiftParameter base(w.dim, j, w.fine);
    out.states = for_each_shift(
        base, level_span(j + 1, w.fine),
        [&](const ShiftParameter& beta) {
            const Coord& g = beta.offset(j);
            GridFunction cur = f;
            for (int a = 0; a < w.dim; ++a)
                cur = impl::along_axis(cur, a, [&](const std::vector<double>& in, std::vector<double>& res) {
                    impl::averaged_projection_line(in, res, K, g[a] - w.lo[a]);
                });
            out.averaged += cur;
        },
        limit);
    out.averaged *= 1.0 / static_cast<double>(out.states);
    out.averaged = impl::shift_cells(out.averaged, shift);

    const std::vector<double> weights = impl::tent_cell_weights(K);
    GridFunction conv = f;
    for (int a = 0; a < w.dim; ++a)
        conv = impl::along_axis(conv, a, [&](const std::vector<double>& in, std::vector<double>& res) {
            impl::convolve_line(in, res, weights);
        });
    out.convolution = impl::shift_cells(conv, shift);
    return out;
}

enum class CubeSelection { All, Good, Bad };

/// g = sum_{I in D_j (selected)} h^0_{I+m} <h^0_I, f>: the level-j average of
/// f over I placed on I + m l(I).
inline GridFunction dyadic_translate(const GridFunction& f, int j, const Coord& m, const DyadicSystem& system,
                                     CubeSelection sel = CubeSelection::All, const BadnessParams& params = {}) {
    const Window& w = f.window();
    require(w == system.window(), "dyadic_translate: f must live on the system window");
    const LevelGrid grid = system.level_grid(j);
    std::vector<double> sums(static_cast<std::size_t>(grid.size() * f.value_dim()), 0.0);
    for (std::int64_t c = 0; c < w.cells(); ++c) {
        const std::int64_t k = grid.index_of_cell(w.cell(c));
        for (int a = 0; a < f.value_dim(); ++a) sums[static_cast<std::size_t>(k * f.value_dim() + a)] += f(c, a);
    }
    GridFunction out(w, f.value_dim());
    const double inv = 1.0 / static_cast<double>(pow2((w.fine - j) * w.dim));
    for (std::int64_t k = 0; k < grid.size(); ++k) {
        bool zero = true;
        for (int a = 0; a < f.value_dim(); ++a) zero = zero && sums[static_cast<std::size_t>(k * f.value_dim() + a)] == 0.0;
        if (zero) continue;
        const DyadicCube I = grid.cube(k);
        if (sel != CubeSelection::All && system.is_bad(I, params) != (sel == CubeSelection::Bad)) continue;
        const DyadicCube target = I.translate(m);
        if (!w.contains(target)) throw ParameterError("dyadic_translate: I + m leaves the window");
        Coord lo{}, hi{};
        for (int i = 0; i < w.dim; ++i) {
            lo[i] = target.lo(i);
            hi[i] = target.hi(i);
        }
        Coord c = lo;
        while (true) {
            const std::int64_t idx = w.index(c);
            for (int a = 0; a < f.value_dim(); ++a) out(idx, a) += sums[static_cast<std::size_t>(k * f.value_dim() + a)] * inv;
            int i = w.dim - 1;
            while (i >= 0 && c[i] + 1 == hi[i]) {
                c[i] = lo[i];
                --i;
            }
            if (i < 0) break;
            ++c[i];
        }
    }
    return out;
}

/// Components g_k = sum_{I in D_{levels[k]}} h^0_{I+m_k} <h^0_I, f_k>; the
/// randomized sum for a sign pattern is sum_k eps_k g_k.
inline std::vector<GridFunction> dyadic_translate_sum(const std::vector<GridFunction>& fs, const std::vector<int>& levels,
                                                      const std::vector<Coord>& ms, const DyadicSystem& system,
                                                      CubeSelection sel = CubeSelection::All,
                                                      const BadnessParams& params = {}) {
    require(fs.size() == levels.size() && fs.size() == ms.size(), "dyadic_translate_sum: one level and translate per function");
    std::vector<GridFunction> out;
    for (std::size_t k = 0; k < fs.size(); ++k) out.push_back(dyadic_translate(fs[k], levels[k], ms[k], system, sel, params));
    return out;
}

// ---------------------------------------------------------------------------
// Periodic grids and discrete transforms. A window is read as one period.

namespace impl {

inline std::vector<std::complex<double>> fft(std::vector<std::complex<double>> data, const Window& w, int sign) {
    std::array<int, kMaxDim> dims{};
    for (int i = 0; i < w.dim; ++i) dims[i] = static_cast<int>(w.extent(i));
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan = fftw_plan_dft(w.dim, dims.data(), p, p, sign, FFTW_ESTIMATE);
    if (!plan) throw ResourceError("fft: plan creation failed");
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    return data;
}

/// Physical frequency of each transform index (cycles per unit length).
inline RealVec frequency(const Window& w, std::int64_t idx) {
    RealVec xi{};
    for (int i = w.dim - 1; i >= 0; --i) {
        const std::int64_t n = w.extent(i);
        std::int64_t k = idx % n;
        idx /= n;
        if (2 * k >= n) k -= n;
        xi[i] = static_cast<double>(k) / (static_cast<double>(n) * w.cell_length());
    }
    return xi;
}

inline double norm2(const RealVec& x, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += x[i] * x[i];
    return std::sqrt(s);
}

}  // namespace impl

/// Applies the Fourier multiplier `sym(xi)` to every component; the real part
/// is returned (the multipliers used here are Hermitian).
inline GridFunction spectral_multiply(const GridFunction& f,
                                      const std::function<std::complex<double>(const RealVec&)>& sym) {
    const Window& w = f.window();
    GridFunction out(w, f.value_dim());
    const double inv = 1.0 / static_cast<double>(w.cells());
    std::vector<std::complex<double>> symbol(static_cast<std::size_t>(w.cells()));
    for (std::int64_t k = 0; k < w.cells(); ++k) symbol[static_cast<std::size_t>(k)] = sym(impl::frequency(w, k));
    for (int a = 0; a < f.value_dim(); ++a) {
        std::vector<std::complex<double>> data(static_cast<std::size_t>(w.cells()));
        for (std::int64_t c = 0; c < w.cells(); ++c) data[static_cast<std::size_t>(c)] = f(c, a);
        data = impl::fft(std::move(data), w, FFTW_FORWARD);
        for (std::size_t k = 0; k < data.size(); ++k) data[k] *= symbol[k];
        data = impl::fft(std::move(data), w, FFTW_BACKWARD);
        for (std::int64_t c = 0; c < w.cells(); ++c) out(c, a) = data[static_cast<std::size_t>(c)].real() * inv;
    }
    return out;
}

/// Fraction of spectral energy outside the closed ball of the given radius.
inline double spectral_leakage(const GridFunction& f, double radius) {
    const Window& w = f.window();
    double in = 0.0, outside = 0.0;
    for (int a = 0; a < f.value_dim(); ++a) {
        std::vector<std::complex<double>> data(static_cast<std::size_t>(w.cells()));
        for (std::int64_t c = 0; c < w.cells(); ++c) data[static_cast<std::size_t>(c)] = f(c, a);
        data = impl::fft(std::move(data), w, FFTW_FORWARD);
        for (std::int64_t k = 0; k < w.cells(); ++k) {
            const double e = std::norm(data[static_cast<std::size_t>(k)]);
            if (impl::norm2(impl::frequency(w, k), w.dim) <= radius * (1.0 + 1e-12)) in += e;
            else outside += e;
        }
    }
    const double total = in + outside;
    return total > 0.0 ? outside / total : 0.0;
}

/// f(. - s) for a real translation s (physical units), by phase shift.
inline GridFunction translate_periodic(const GridFunction& f, const RealVec& s) {
    const int dim = f.window().dim;
    return spectral_multiply(f, [&](const RealVec& xi) {
        double dot = 0.0;
        for (int i = 0; i < dim; ++i) dot += s[i] * xi[i];
        return std::polar(1.0, -2.0 * std::numbers::pi * dot);
    });
}

/// f(. - shift) for a shift in whole cells, cyclically.
inline GridFunction cyclic_shift(const GridFunction& f, const Coord& shift) {
    const Window& w = f.window();
    GridFunction out(w, f.value_dim());
    for (std::int64_t c = 0; c < w.cells(); ++c) {
        Coord src = w.cell(c);
        for (int i = 0; i < w.dim; ++i) src[i] = w.lo[i] + mod_floor(src[i] - shift[i] - w.lo[i], w.extent(i));
        const std::int64_t s = w.index(src);
        for (int a = 0; a < f.value_dim(); ++a) out(c, a) = f(s, a);
    }
    return out;
}

/// phi_l * f with phi_l(x) = l^{-n} phi(x / l), exact for trigonometric
/// polynomials: each mode is multiplied by phi^(l xi).
inline GridFunction smooth_periodic(const GridFunction& f, double l) {
    const int dim = f.window().dim;
    return spectral_multiply(f, [&](const RealVec& xi) {
        RealVec s{};
        for (int i = 0; i < dim; ++i) s[i] = l * xi[i];
        return std::complex<double>(tent_hat(s, dim), 0.0);
    });
}

// ---------------------------------------------------------------------------
// Band-limited families.

struct BandlimitedFamily {
    Window grid;              // one period
    std::vector<int> levels;  // f[k] has spectrum in B(0, 2^{levels[k]-1})
    std::vector<GridFunction> f;

    static double band_radius(int level) { return std::ldexp(0.5, level); }
    static double scale(int level) { return std::ldexp(1.0, -level); }
};

/// Random real trigonometric polynomials: independent complex Gaussian
/// coefficients on the band, real part taken, each f_k scaled to unit L^2
/// norm.
inline BandlimitedFamily make_bandlimited_family(const Window& grid, const std::vector<int>& levels, int value_dim,
                                                 std::uint64_t seed) {
    BandlimitedFamily fam{grid, levels, {}};
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const double r = BandlimitedFamily::band_radius(levels[k]);
        for (int i = 0; i < grid.dim; ++i)
            require(r < 0.5 / grid.cell_length(), "bandlimited family: band exceeds the grid's Nyquist frequency");
        Rng rng = make_rng(seed, k);
        std::normal_distribution<double> normal(0.0, 1.0);
        GridFunction f(grid, value_dim);
        for (int a = 0; a < value_dim; ++a) {
            std::vector<std::complex<double>> data(static_cast<std::size_t>(grid.cells()));
            for (std::int64_t idx = 0; idx < grid.cells(); ++idx) {
                if (impl::norm2(impl::frequency(grid, idx), grid.dim) > r) continue;
                const double re = normal(rng), im = normal(rng);
                data[static_cast<std::size_t>(idx)] = {re, im};
            }
            data = impl::fft(std::move(data), grid, FFTW_BACKWARD);
            for (std::int64_t c = 0; c < grid.cells(); ++c) f(c, a) = data[static_cast<std::size_t>(c)].real();
        }
        f *= 1.0 / lp_norm(f, 2.0);
        fam.f.push_back(std::move(f));
    }
    return fam;
}

// ---------------------------------------------------------------------------
// Cutoff multipliers.

/// psi: smooth radial step, 1 on B(0, inner) and 0 outside B(0, outer),
/// built from exp(-1/t); chi = psi / phi^.
struct ChiProfile {
    double inner = 0.5;
    double outer = 0.9;

    static double step(double t) {  // 1 at t <= 0, 0 at t >= 1, C-infinity
        auto g = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
        if (t <= 0.0) return 1.0;
        if (t >= 1.0) return 0.0;
        return g(1.0 - t) / (g(1.0 - t) + g(t));
    }
    double psi(const RealVec& xi, int dim) const { return step((impl::norm2(xi, dim) - inner) / (outer - inner)); }
    double chi(const RealVec& xi, int dim) const {
        const double p = psi(xi, dim);
        return p == 0.0 ? 0.0 : p / tent_hat(xi, dim);
    }
};

inline ChiProfile build_chi() { return {}; }

/// y = m + z with m the nearest lattice point and z in [-1/2, 1/2)^n.
inline std::pair<Coord, RealVec> split_translation(const RealVec& y, int dim) {
    Coord m{};
    RealVec z{};
    for (int i = 0; i < dim; ++i) {
        m[i] = static_cast<std::int64_t>(std::floor(y[i] + 0.5));
        z[i] = y[i] - static_cast<double>(m[i]);
    }
    return {m, z};
}

/// sigma(xi) = exp(-i 2 pi z . xi) chi(xi).
inline std::complex<double> sigma(const ChiProfile& chi, const RealVec& z, const RealVec& xi, int dim) {
    double dot = 0.0;
    for (int i = 0; i < dim; ++i) dot += z[i] * xi[i];
    return std::polar(chi.chi(xi, dim), -2.0 * std::numbers::pi * dot);
}

/// T_j g: multiply the transform by sigma(l_j xi).
inline GridFunction apply_Tj(const GridFunction& g, int level, const RealVec& z, const ChiProfile& chi) {
    const int dim = g.window().dim;
    const double l = BandlimitedFamily::scale(level);
    return spectral_multiply(g, [&](const RealVec& xi) {
        RealVec s{};
        for (int i = 0; i < dim; ++i) s[i] = l * xi[i];
        return sigma(chi, z, s, dim);
    });
}

/// int |d_1 ... d_n sigma| over [-1, 1]^n, as the sum of absolute mixed
/// differences on a grid of spacing 2 / steps.
inline double multiplier_variation(const ChiProfile& chi, const RealVec& z, int dim, int steps = 4000) {
    require(dim >= 1 && dim <= 2, "multiplier_variation: dimensions 1 and 2 only");
    const double h = 2.0 / steps;
    auto s = [&](int a, int b) {
        RealVec xi{-1.0 + a * h, dim > 1 ? -1.0 + b * h : 0.0, 0.0};
        return sigma(chi, z, xi, dim);
    };
    double total = 0.0;
    if (dim == 1) {
        for (int a = 0; a < steps; ++a) total += std::abs(s(a + 1, 0) - s(a, 0));
    } else {
        for (int a = 0; a < steps; ++a)
            for (int b = 0; b < steps; ++b) total += std::abs(s(a + 1, b + 1) - s(a + 1, b) - s(a, b + 1) + s(a, b));
    }
    return total;
}

// ---------------------------------------------------------------------------
// Randomized norms.

struct SignEnsemble {
    enum class Mode { Exhaustive, Sampled };
    Mode mode = Mode::Exhaustive;
    int count = 1000;
    std::uint64_t seed = 1;

    static SignEnsemble exhaustive() { return {}; }
    static SignEnsemble sampled(int count, std::uint64_t seed) { return {Mode::Sampled, count, seed}; }

    /// Bit k set means eps_k = -1.
    std::vector<std::uint32_t> patterns(int J) const {
        require(J >= 1 && J <= 24, "sign ensemble: 1 <= J <= 24");
        std::vector<std::uint32_t> out;
        if (mode == Mode::Exhaustive) {
            for (std::uint32_t s = 0; s < (1u << J); ++s) out.push_back(s);
            return out;
        }
        require(count >= 1, "sign ensemble: count must be positive");
        Rng rng = make_rng(seed);
        const std::uint32_t mask = (1u << J) - 1;
        for (int t = 0; t < count; ++t) out.push_back(static_cast<std::uint32_t>(rng()) & mask);
        return out;
    }
};

struct RandomizedNorm {
    double value = 0.0;
    double standard_error = 0.0;  // zero in exhaustive mode
    int patterns = 0;
};

/// (average over sign patterns of ||sum_k eps_k g_k||_p^p)^{1/p}. Patterns
/// that differ by a global sign give the same norm and are evaluated once.
inline RandomizedNorm randomized_norm(const std::vector<GridFunction>& gs, const SignEnsemble& signs, double p) {
    require(!gs.empty(), "randomized_norm: empty family");
    require(p >= 1.0 && std::isfinite(p), "randomized_norm: p must lie in [1, inf)");
    for (const auto& g : gs) gs.front().check_same(g);
    const int J = static_cast<int>(gs.size());
    const auto pats = signs.patterns(J);
    std::map<std::uint32_t, int> mult;
    const std::uint32_t full = (1u << J) - 1;
    for (std::uint32_t s : pats) ++mult[(s & 1u) ? (s ^ full) : s];
    const GridFunction& g0 = gs.front();
    const int d = g0.value_dim();
    std::vector<double> value(mult.size(), 0.0);
    std::vector<std::vector<double>> eps;
    for (const auto& [s, n] : mult) {
        std::vector<double> e(static_cast<std::size_t>(J));
        for (int k = 0; k < J; ++k) e[static_cast<std::size_t>(k)] = ((s >> k) & 1u) ? -1.0 : 1.0;
        eps.push_back(std::move(e));
    }
    std::vector<double> acc(static_cast<std::size_t>(d));
    for (std::int64_t c = 0; c < g0.cells(); ++c) {
        for (std::size_t q = 0; q < eps.size(); ++q) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int k = 0; k < J; ++k) {
                const double e = eps[q][static_cast<std::size_t>(k)];
                for (int a = 0; a < d; ++a) acc[static_cast<std::size_t>(a)] += e * gs[static_cast<std::size_t>(k)](c, a);
            }
            double s2 = 0.0;
            for (double v : acc) s2 += v * v;
            value[q] += p == 2.0 ? s2 : std::pow(s2, 0.5 * p);
        }
    }
    const double vol = g0.cell_volume();
    double mean = 0.0, mean2 = 0.0, total = 0.0;
    std::size_t q = 0;
    for (const auto& [s, n] : mult) {
        const double v = value[q++] * vol;
        mean += n * v;
        mean2 += n * v * v;
        total += n;
    }
    mean /= total;
    mean2 /= total;
    RandomizedNorm out;
    out.patterns = static_cast<int>(total);
    out.value = std::pow(mean, 1.0 / p);
    if (signs.mode == SignEnsemble::Mode::Sampled && total > 1) {
        const double se_mean = std::sqrt(std::max(0.0, mean2 - mean * mean) * total / (total - 1) / total);
        out.standard_error = out.value / (p * mean) * se_mean;  // delta method
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experiments.

struct TranslationConfig {
    double p = 4.0;
    int J = 6;  // levels 0..J-1
    std::vector<double> ys{2, 8, 32, 128};
    std::uint64_t seed = 1;
    int samples = 1000;  // 0 = exhaustive signs
    int domain_factor = 64;
    int value_dim = 1;
    std::int64_t max_cells = std::int64_t{1} << 22;
};

struct TranslationReport {
    double base_norm = 0.0;
    std::vector<double> ys;
    std::vector<double> ratio;      // R(y)
    std::vector<double> envelope;   // R(y) / (1 + log2+ |y|)
    std::vector<double> standard_error;
    std::int64_t cells = 0;
    double domain = 0.0;

    double envelope_spread() const {
        double lo = INFINITY, hi = 0.0;
        for (double e : envelope) {
            lo = std::min(lo, e);
            hi = std::max(hi, e);
        }
        return hi / lo;
    }
};

inline double log2_plus(double x) { return x > 1.0 ? std::log2(x) : 0.0; }

/// R(y) = ||sum eps_j f_j(. - l_j y)||_p / ||sum eps_j f_j||_p for y_j = y on
/// a one-dimensional periodic domain at least domain_factor times the
/// largest translation. Integer y translate by whole cells.
inline TranslationReport translation_experiment(const TranslationConfig& cfg) {
    require(cfg.J >= 1 && cfg.J <= 16, "translation experiment: 1 <= J <= 16");
    require(!cfg.ys.empty(), "translation experiment: no translations");
    double ymax = 0.0;
    for (double y : cfg.ys) ymax = std::max(ymax, std::abs(y));
    const int fine = cfg.J;  // cell 2^{-J}: Nyquist 2^{J-1}, twice the top band
    std::int64_t domain = 1;
    while (static_cast<double>(domain) < cfg.domain_factor * std::max(ymax, 1.0)) domain *= 2;
    const std::int64_t cells = domain * pow2(fine);
    if (cells > cfg.max_cells) throw ResourceError("translation experiment: grid of " + std::to_string(cells) + " cells");
    const Window grid = Window::cube(1, fine, 0, cells);
    const auto fam = make_bandlimited_family(grid, level_span(0, cfg.J - 1), cfg.value_dim, cfg.seed);
    const SignEnsemble signs =
        cfg.samples > 0 ? SignEnsemble::sampled(cfg.samples, mix64(cfg.seed)) : SignEnsemble::exhaustive();
    TranslationReport rep;
    rep.cells = cells;
    rep.domain = static_cast<double>(domain);
    rep.base_norm = randomized_norm(fam.f, signs, cfg.p).value;
    for (double y : cfg.ys) {
        std::vector<GridFunction> moved;
        for (std::size_t k = 0; k < fam.f.size(); ++k) {
            const double s = BandlimitedFamily::scale(fam.levels[k]) * y;
            const double cellsh = s * std::ldexp(1.0, fine);
            if (cellsh == std::round(cellsh))
                moved.push_back(cyclic_shift(fam.f[k], {static_cast<std::int64_t>(cellsh), 0, 0}));
            else
                moved.push_back(translate_periodic(fam.f[k], {s, 0.0, 0.0}));
        }
        const RandomizedNorm r = randomized_norm(moved, signs, cfg.p);
        rep.ys.push_back(y);
        rep.ratio.push_back(r.value / rep.base_norm);
        rep.envelope.push_back(rep.ratio.back() / (1.0 + log2_plus(std::abs(y))));
        rep.standard_error.push_back(r.standard_error / rep.base_norm);
    }
    return rep;
}

struct SteinCheck {
    double lhs = 0.0;  // || sum eps_j E_j f_j ||
    double rhs = 0.0;  // || sum eps_j f_j ||
    double ratio = 0.0;
};

/// Randomized norms of sum eps_j E_j f_j and sum eps_j f_j, with E_j the
/// conditional expectation on the level-j cubes of `system`.
inline SteinCheck stein_check(const BandlimitedFamily& fam, const DyadicSystem& system, double p,
                              const SignEnsemble& signs) {
    std::vector<GridFunction> proj;
    for (std::size_t k = 0; k < fam.f.size(); ++k) proj.push_back(project(fam.f[k], fam.levels[k], system));
    SteinCheck out;
    out.lhs = randomized_norm(proj, signs, p).value;
    out.rhs = randomized_norm(fam.f, signs, p).value;
    out.ratio = out.lhs / out.rhs;
    return out;
}

struct PipelineCheck {
    double relative_error = 0.0;  // worst over j, L^2
    double leakage = 0.0;         // worst spectral leakage over all stages
};

/// f_j(. - l_j y_j) against T_j[(phi_{l_j} * f_j)(. - l_j m_j)] for every
/// member of the family, with y_j = m_j + z_j.
inline PipelineCheck pipeline_check(const BandlimitedFamily& fam, const std::vector<RealVec>& ys, const ChiProfile& chi) {
    require(ys.size() == fam.f.size(), "pipeline_check: one translation per function");
    const Window& w = fam.grid;
    PipelineCheck out;
    for (std::size_t k = 0; k < fam.f.size(); ++k) {
        const int j = fam.levels[k];
        const double l = BandlimitedFamily::scale(j), r = BandlimitedFamily::band_radius(j);
        const auto [m, z] = split_translation(ys[k], w.dim);
        RealVec s{};
        Coord mc{};
        for (int i = 0; i < w.dim; ++i) {
            s[i] = l * ys[k][i];
            const double cells = l * static_cast<double>(m[i]) / w.cell_length();
            require(cells == std::round(cells), "pipeline_check: l_j m_j must be a whole number of cells");
            mc[i] = static_cast<std::int64_t>(cells);
        }
        const GridFunction lhs = translate_periodic(fam.f[k], s);
        const GridFunction smoothed = cyclic_shift(smooth_periodic(fam.f[k], l), mc);
        const GridFunction rhs = apply_Tj(smoothed, j, z, chi);
        out.relative_error = std::max(out.relative_error, lp_norm(lhs - rhs, 2.0) / lp_norm(lhs, 2.0));
        for (const GridFunction* g : {&fam.f[k], &lhs, &smoothed, &rhs})
            out.leakage = std::max(out.leakage, spectral_leakage(*g, r));
    }
    return out;
}

}  // namespace haardyad

#endif  // HAARDYAD_BOURGAIN_HPP
