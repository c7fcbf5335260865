#ifndef HAARDYAD_FIGIEL_HPP
#define HAARDYAD_FIGIEL_HPP

// Truncated telescoping representation of a pairing on a finite window:
//
//   <g, T f> = sum_{j=c}^{J-1} (A_j + B_j + C_j) + <E_c g, T E_c f>,
//   B_j = B0_j + P_j,   C_j = C0_j + Q_j,
//
// with c the coarsest and J the finest level. In Haar coordinates, with
// c_j(m, eta, theta) = <h^eta_{I+m}, T h^theta_I> for level-j cubes:
//
//   A_j  = sum ghat(I+m, eta) c(m, eta, theta) fhat(I, theta)
//   B0_j = sum (ghat(I+m, 0) - ghat(I, 0)) c(m, 0, theta) fhat(I, theta)
//   P_j  = sum ghat(I, 0) S(theta) fhat(I, theta),   S = sum_m c(m, 0, theta)
//   C0_j = sum ghat(J, eta) c(-m, eta, 0) (fhat(J+m, 0) - fhat(J, 0))
//   Q_j  = sum ghat(J, eta) S'(eta) fhat(J, 0),      S' = sum_m c(m, eta, 0)
//
// where ghat(I, 0), fhat(I, 0) are the averaging coefficients <h^0_I, .>.
// The sums over m run over |m|_inf <= m_max; S and S' are series limits.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "haardyad/kernel.hpp"

namespace haardyad {

struct FigielOptions {
    int m_max = 16;
    /// Base radius R of the paraproduct partial sums over |m| <= R, 2R, 4R;
    /// 0 picks 512 in one dimension, 8 in two and 2 in three.
    int paraproduct_radius = 0;
    /// Translate range of the tables behind the decay envelope; 0 picks
    /// max(m_max, 64) in one dimension and max(m_max, 16) otherwise.
    int envelope_m = 0;
    QuadratureOptions quadrature;
};

/// Partial sums of a series over |m|_inf <= R, 2R, 4R and their two-step
/// Richardson extrapolation under the error model a/R + b/R^2.
struct SeriesLimit {
    std::array<double, 3> partial{};
    int radius = 0;
    double limit = 0.0;
    double uncertainty = 0.0;  // |second-order minus first-order estimate|
};

inline SeriesLimit richardson(const std::array<double, 3>& s, int radius) {
    SeriesLimit out;
    out.partial = s;
    out.radius = radius;
    const double r1 = 2.0 * s[1] - s[0];
    const double r2 = 2.0 * s[2] - s[1];
    out.limit = (4.0 * r2 - r1) / 3.0;
    out.uncertainty = std::abs(r2 - out.limit);
    return out;
}

/// Calls fn(m) for every m with |m|_inf <= radius, lexicographically.
template <class Fn>
void for_each_translate(int dim, int radius, Fn&& fn) {
    Coord m{};
    for (int i = 0; i < dim; ++i) m[i] = -radius;
    while (true) {
        fn(static_cast<const Coord&>(m));
        int i = dim - 1;
        while (i >= 0 && m[i] == radius) {
            m[i] = -radius;
            --i;
        }
        if (i < 0) return;
        ++m[i];
    }
}

/// Kernel data for levels coarsest..finest-1: coefficient tables, decay
/// envelopes and the paraproduct series. The boundary coefficients at the
/// coarsest level are computed lazily, so the object is not thread-safe.
class FigielTables {
public:
    FigielTables(CZKernel kernel, int coarsest, int finest, FigielOptions opt = {})
        : K_(std::move(kernel)),
          coarsest_(coarsest),
          finest_(finest),
          opt_(opt),
          boundary_(K_, std::ldexp(1.0, -coarsest - 1), opt.quadrature) {
        require(coarsest < finest, "figiel: need coarsest < finest level");
        require(opt_.m_max >= 1, "figiel: m_max must be >= 1");
        if (opt_.paraproduct_radius == 0) opt_.paraproduct_radius = K_.dim == 1 ? 512 : (K_.dim == 2 ? 8 : 2);
        if (opt_.envelope_m == 0) opt_.envelope_m = std::max(opt_.m_max, K_.dim == 1 ? 64 : 16);
        require(opt_.paraproduct_radius >= 1, "figiel: paraproduct radius must be >= 1");
        require(opt_.envelope_m >= opt_.m_max, "figiel: envelope range must cover m_max");
        tail_ = shell_tail_bound(K_.dim, opt_.m_max, K_.dim + K_.alpha, false);
        for (int j = coarsest; j < finest; ++j) levels_.push_back(build(j));
    }

    const CZKernel& kernel() const { return K_; }
    int dim() const { return K_.dim; }
    int coarsest() const { return coarsest_; }
    int finest() const { return finest_; }
    int m_max() const { return opt_.m_max; }
    const FigielOptions& options() const { return opt_; }

    const CoeffTable& table(int level) const { return level_data(level).table; }
    double coeff(int level, const Coord& m, std::uint32_t eta, std::uint32_t theta) const {
        return level_data(level).table.at(m, eta, theta);
    }
    /// sup |c(m)| (1 + |m|_2)^{n + alpha} over the envelope table.
    double envelope(int level) const { return level_data(level).envelope; }
    /// sum over |m|_inf > m_max of (1 + |m|)^{-(n + alpha)}, bounded above.
    double tail_sum() const { return tail_; }

    /// sum_m c(m, 0, theta) = |I|^{-1/2} <T^*1, h^theta_I>.
    const SeriesLimit& t_star_one(int level, std::uint32_t theta) const {
        return level_data(level).t_star_one.at(theta);
    }
    /// sum_m c(m, eta, 0) = |I|^{-1/2} <h^eta_I, T1>.
    const SeriesLimit& t_one(int level, std::uint32_t eta) const { return level_data(level).t_one.at(eta); }
    /// The same sums over |m|_inf <= m_max only.
    double t_star_one_truncated(int level, std::uint32_t theta) const {
        return level_data(level).t_star_one_trunc.at(theta);
    }
    double t_one_truncated(int level, std::uint32_t eta) const { return level_data(level).t_one_trunc.at(eta); }

    /// <T^*1, h^theta_I> for a level-j cube.
    double paraproduct_coeff(int level, std::uint32_t theta) const {
        return std::exp2(-0.5 * level * dim()) * t_star_one(level, theta).limit;
    }

    /// <h^0_{I+m}, T h^0_I> at the coarsest level.
    double boundary_coeff(const Coord& m) { return impl::haar_pair(boundary_, coarsest_, m, 0, 0); }

private:
    struct Level {
        CoeffTable table;
        double envelope = 0.0;
        std::vector<SeriesLimit> t_star_one, t_one;
        std::vector<double> t_star_one_trunc, t_one_trunc;
    };

    const Level& level_data(int level) const {
        if (level < coarsest_ || level >= finest_)
            throw RangeError("figiel: level " + std::to_string(level) + " outside the table range");
        return levels_[static_cast<std::size_t>(level - coarsest_)];
    }

    Level build(int level) {
        CellQuadrature quad(K_, std::ldexp(1.0, -level - 1), opt_.quadrature);
        Level L;
        L.table = coefficient_table(quad, level, opt_.envelope_m);
        DecayReport d;
        d.table = L.table;
        fit_decay(d);
        L.envelope = d.fitted_constant;
        const int n = K_.dim;
        const auto types = static_cast<std::size_t>(1u << n);
        const int R = opt_.paraproduct_radius;
        std::vector<std::array<double, 3>> star(types), one(types);
        L.t_star_one_trunc.assign(types, 0.0);
        L.t_one_trunc.assign(types, 0.0);
        for_each_translate(n, 4 * R, [&](const Coord& m) {
            const auto r = norm_inf(m, n);
            for (std::uint32_t t = 1; t < types; ++t) {
                const double a = impl::haar_pair(quad, level, m, 0, t);
                const double b = impl::haar_pair(quad, level, m, t, 0);
                for (int q = 0; q < 3; ++q)
                    if (r <= (static_cast<std::int64_t>(R) << q)) {
                        star[t][static_cast<std::size_t>(q)] += a;
                        one[t][static_cast<std::size_t>(q)] += b;
                    }
                if (r <= opt_.m_max) {
                    L.t_star_one_trunc[t] += a;
                    L.t_one_trunc[t] += b;
                }
            }
        });
        L.t_star_one.resize(types);
        L.t_one.resize(types);
        for (std::uint32_t t = 1; t < types; ++t) {
            L.t_star_one[t] = richardson(star[t], R);
            L.t_one[t] = richardson(one[t], R);
        }
        return L;
    }

    CZKernel K_;
    int coarsest_;
    int finest_;
    FigielOptions opt_;
    CellQuadrature boundary_;
    double tail_ = 0.0;
    std::vector<Level> levels_;
};

enum class Term { A, B0, C0, P, Q, Boundary };

inline const char* term_name(Term t) {
    switch (t) {
        case Term::A: return "A";
        case Term::B0: return "B0";
        case Term::C0: return "C0";
        case Term::P: return "P";
        case Term::Q: return "Q";
        case Term::Boundary: return "boundary";
    }
    return "?";
}

namespace impl {

/// Enumerates every elementary product of the representation as
///   fn(term, level, |m|_inf, good, g-cube, g-type, f-cube, f-type, weight)
/// so that the pairing is sum weight * ghat(g-cube, g-type) * fhat(f-cube, f-type),
/// cube indices referring to the system's level grid. `good` refers to the
/// summation cube (I for A and B0, J for C0) and is true for P, Q, boundary.
/// Products whose g-side cube falls off the window grid are skipped (both
/// functions vanish there).
template <class SkipF, class SkipG, class Good, class Fn>
void visit_terms(FigielTables& t, const DyadicSystem& sys, SkipF&& skip_f, SkipG&& skip_g, Good&& good, Fn&& fn) {
    const int n = sys.dim();
    const int M = t.m_max();
    const std::uint32_t types = 1u << n;
    for (int j = t.coarsest(); j < t.finest(); ++j) {
        const LevelGrid grid = sys.level_grid(j);
        for (std::int64_t k = 0; k < grid.size(); ++k) {
            if (!skip_f(j, k)) {
                const DyadicCube I = grid.cube(k);
                const bool ok = good(I);
                for (std::uint32_t th = 1; th < types; ++th)
                    fn(Term::P, j, 0, true, k, 0u, k, th, t.t_star_one(j, th).limit);
                for_each_translate(n, M, [&](const Coord& m) {
                    const std::int64_t kj = grid.index(I.translate(m));
                    const int shell = static_cast<int>(norm_inf(m, n));
                    if (kj >= 0)
                        for (std::uint32_t th = 1; th < types; ++th)
                            for (std::uint32_t e = 1; e < types; ++e)
                                fn(Term::A, j, shell, ok, kj, e, k, th, t.coeff(j, m, e, th));
                    if (shell == 0) return;
                    for (std::uint32_t th = 1; th < types; ++th) {
                        const double c = t.coeff(j, m, 0, th);
                        if (kj >= 0) fn(Term::B0, j, shell, ok, kj, 0u, k, th, c);
                        fn(Term::B0, j, shell, ok, k, 0u, k, th, -c);
                    }
                });
            }
            if (!skip_g(j, k)) {
                const DyadicCube J = grid.cube(k);
                const bool ok = good(J);
                for (std::uint32_t e = 1; e < types; ++e) fn(Term::Q, j, 0, true, k, e, k, 0u, t.t_one(j, e).limit);
                for_each_translate(n, M, [&](const Coord& m) {
                    const int shell = static_cast<int>(norm_inf(m, n));
                    if (shell == 0) return;
                    const std::int64_t ki = grid.index(J.translate(m));
                    Coord neg{};
                    for (int i = 0; i < n; ++i) neg[i] = -m[i];
                    for (std::uint32_t e = 1; e < types; ++e) {
                        const double c = t.coeff(j, neg, e, 0);
                        if (ki >= 0) fn(Term::C0, j, shell, ok, k, e, ki, 0u, c);
                        fn(Term::C0, j, shell, ok, k, e, k, 0u, -c);
                    }
                });
            }
        }
    }
    const int c = t.coarsest();
    const LevelGrid grid = sys.level_grid(c);
    for (std::int64_t kf = 0; kf < grid.size(); ++kf) {
        if (skip_f(c, kf)) continue;
        const DyadicCube I = grid.cube(kf);
        for (std::int64_t kg = 0; kg < grid.size(); ++kg) {
            if (skip_g(c, kg)) continue;
            const DyadicCube J = grid.cube(kg);
            Coord m{};
            for (int i = 0; i < n; ++i) m[i] = (J.corner[i] - I.corner[i]) / I.side();
            fn(Term::Boundary, c, static_cast<int>(norm_inf(m, n)), true, kg, 0u, kf, 0u, t.boundary_coeff(m));
        }
    }
}

/// Bounding box of the nonzero cells; nullopt when f vanishes.
inline std::optional<Window> support_box(const GridFunction& f) {
    const Window& w = f.window();
    Window box{w.dim, w.fine, {}, {}};
    bool any = false;
    for (std::int64_t c = 0; c < f.cells(); ++c) {
        bool nz = false;
        for (int k = 0; k < f.value_dim(); ++k) nz = nz || f(c, k) != 0.0;
        if (!nz) continue;
        const Coord cell = w.cell(c);
        for (int i = 0; i < w.dim; ++i) {
            if (!any || cell[i] < box.lo[i]) box.lo[i] = cell[i];
            if (!any || cell[i] + 1 > box.hi[i]) box.hi[i] = cell[i] + 1;
        }
        any = true;
    }
    if (!any) return std::nullopt;
    return box;
}

inline void check_margin(const GridFunction& f, std::int64_t margin, const char* name) {
    const auto box = support_box(f);
    if (!box) return;
    const Window& w = f.window();
    for (int i = 0; i < w.dim; ++i)
        if (box->lo[i] - w.lo[i] < margin || w.hi[i] - box->hi[i] < margin)
            throw ParameterError(std::string("decompose: support of ") + name +
                                 " is closer than m_max * 2^{-coarsest} to the window edge");
}

inline bool has_coefficients(const HaarCoefficients& c, int level, std::int64_t k) {
    const std::uint32_t types = level < c.jmax() ? (1u << c.dim()) : 1u;
    for (std::uint32_t t = 0; t < types; ++t)
        for (int comp = 0; comp < c.value_dim(); ++comp)
            if (c.at(level, k, t, comp) != 0.0) return true;
    return false;
}

inline void check_inputs(const FigielTables& t, const GridFunction& f, const GridFunction& g, const DyadicSystem& sys) {
    if (!(f.window() == sys.window()) || !(g.window() == sys.window()))
        throw ParameterError("decompose: functions must live on the system window");
    if (f.value_dim() != g.value_dim()) throw ParameterError("decompose: value dimensions differ");
    if (t.dim() != sys.dim()) throw ParameterError("decompose: kernel dimension mismatch");
    if (t.finest() != sys.jmax() || t.coarsest() < sys.jmin())
        throw ParameterError("decompose: table levels must be [coarsest, jmax) inside the system range");
}

}  // namespace impl

struct LevelTerms {
    int level = 0;
    double A = 0.0, B0 = 0.0, C0 = 0.0, P = 0.0, Q = 0.0;
    /// A + B0 + C0 contributions by |m|_inf = 0..m_max.
    std::vector<double> shells;
    double tail_bound = 0.0;
};

struct DecompositionTerms {
    int m_max = 0;
    double A = 0.0, B0 = 0.0, C0 = 0.0, P = 0.0, Q = 0.0;
    double boundary = 0.0;
    /// P and Q with the paraproduct series cut at m_max: B0 + P_truncated is
    /// exactly the truncated B.
    double P_truncated = 0.0, Q_truncated = 0.0;
    bool restricted = false;
    double A_good = 0.0, B0_good = 0.0, C0_good = 0.0;
    double A_bad = 0.0, B0_bad = 0.0, C0_bad = 0.0;
    /// Bound on |<g, T f> - total()| from the decay envelope and the
    /// paraproduct extrapolation uncertainty.
    double tail_bound = 0.0;
    std::vector<LevelTerms> levels;

    double total() const { return A + B0 + C0 + P + Q + boundary; }
    double truncated_total() const { return A + B0 + C0 + P_truncated + Q_truncated + boundary; }
    double good_cancellative() const { return A_good + B0_good + C0_good; }
};

/// All terms of the representation of <g, T f> in the system. With
/// `badness`, the A, B0, C0 sums are also split by goodness of the summation
/// cube. Requires the supports of f and g to keep m_max * 2^{-coarsest} away
/// from the window edge.
inline DecompositionTerms decompose(FigielTables& t, const GridFunction& f, const GridFunction& g,
                                    const DyadicSystem& sys, const BadnessParams* badness = nullptr) {
    impl::check_inputs(t, f, g, sys);
    const std::int64_t margin = t.m_max() * pow2(sys.jmax() - t.coarsest());
    impl::check_margin(f, margin, "f");
    impl::check_margin(g, margin, "g");
    if (badness) badness->validate();
    const HaarCoefficients fc = analyze(f, sys);
    const HaarCoefficients gc = analyze(g, sys);
    const int d = f.value_dim();
    const int n = sys.dim();
    const std::uint32_t types = 1u << n;

    DecompositionTerms out;
    out.m_max = t.m_max();
    out.restricted = badness != nullptr;
    for (int j = t.coarsest(); j < t.finest(); ++j) {
        LevelTerms L;
        L.level = j;
        L.shells.assign(static_cast<std::size_t>(t.m_max() + 1), 0.0);
        out.levels.push_back(std::move(L));
    }
    auto good = [&](const DyadicCube& q) { return !badness || !is_bad(q, *badness, sys.shift()); };
    impl::visit_terms(
        t, sys, [&](int j, std::int64_t k) { return !impl::has_coefficients(fc, j, k); },
        [&](int j, std::int64_t k) { return !impl::has_coefficients(gc, j, k); }, good,
        [&](Term kind, int j, int shell, bool ok, std::int64_t kg, std::uint32_t tg, std::int64_t kf,
            std::uint32_t tf, double w) {
            double dot = 0.0;
            for (int comp = 0; comp < d; ++comp) dot += gc.at(j, kg, tg, comp) * fc.at(j, kf, tf, comp);
            const double v = w * dot;
            if (kind == Term::Boundary) {
                out.boundary += v;
                return;
            }
            LevelTerms& L = out.levels[static_cast<std::size_t>(j - t.coarsest())];
            double *total = nullptr, *lev = nullptr, *gd = nullptr, *bd = nullptr;
            switch (kind) {
                case Term::A: total = &out.A, lev = &L.A, gd = &out.A_good, bd = &out.A_bad; break;
                case Term::B0: total = &out.B0, lev = &L.B0, gd = &out.B0_good, bd = &out.B0_bad; break;
                case Term::C0: total = &out.C0, lev = &L.C0, gd = &out.C0_good, bd = &out.C0_bad; break;
                case Term::P: total = &out.P, lev = &L.P; break;
                case Term::Q: total = &out.Q, lev = &L.Q; break;
                case Term::Boundary: break;
            }
            *total += v;
            *lev += v;
            if (gd) {
                L.shells[static_cast<std::size_t>(shell)] += v;
                if (badness) *(ok ? gd : bd) += v;
            }
        });

    // Truncated paraproducts and the tail bound, level by level.
    for (LevelTerms& L : out.levels) {
        const int j = L.level;
        const LevelGrid& grid = fc.grid(j);
        std::vector<double> gn(types, 0.0), fn(types, 0.0), g0f(types, 0.0), gf0(types, 0.0);
        for (std::int64_t k = 0; k < grid.size(); ++k)
            for (std::uint32_t tt = 0; tt < types; ++tt)
                for (int comp = 0; comp < d; ++comp) {
                    const double a = gc.at(j, k, tt, comp), b = fc.at(j, k, tt, comp);
                    gn[tt] += a * a;
                    fn[tt] += b * b;
                    g0f[tt] += gc.at(j, k, 0, comp) * b;  // <ghat_0, fhat_t>
                    gf0[tt] += a * fc.at(j, k, 0, comp);  // <ghat_t, fhat_0>
                }
        for (auto& v : gn) v = std::sqrt(v);
        for (auto& v : fn) v = std::sqrt(v);
        double cs = 0.0, unc = 0.0;
        for (std::uint32_t a = 1; a < types; ++a) {
            out.P_truncated += t.t_star_one_truncated(j, a) * g0f[a];
            out.Q_truncated += t.t_one_truncated(j, a) * gf0[a];
            cs += 2.0 * gn[0] * fn[a] + 2.0 * gn[a] * fn[0];
            for (std::uint32_t b = 1; b < types; ++b) cs += gn[a] * fn[b];
            unc += t.t_star_one(j, a).uncertainty * std::abs(g0f[a]) + t.t_one(j, a).uncertainty * std::abs(gf0[a]);
        }
        L.tail_bound = t.envelope(j) * t.tail_sum() * cs + unc;
        out.tail_bound += L.tail_bound;
    }
    return out;
}

/// Convenience overload: tables over all levels of the system.
inline DecompositionTerms decompose(const CZKernel& K, const GridFunction& f, const GridFunction& g,
                                    const DyadicSystem& sys, FigielOptions opt = {}) {
    FigielTables t(K, sys.jmin(), sys.jmax(), opt);
    return decompose(t, f, g, sys);
}

/// Terms with A, B0, C0 split into good and bad summation cubes.
inline DecompositionTerms restrict_to_good(FigielTables& t, const GridFunction& f, const GridFunction& g,
                                           const DyadicSystem& sys, const BadnessParams& params) {
    return decompose(t, f, g, sys, &params);
}

/// Gap |<g, T f> - total()| against the direct quadrature pairing, for an
/// ensemble of independent Gaussian pairs (f, g) and systems, as m_max grows.
/// A single pair mixes error terms of both signs, so at small m_max its gap
/// can grow; the root mean square over the ensemble shows the 1/m_max trend.
struct TruncationStudy {
    std::vector<int> m_values;
    std::vector<double> rms_gap;
    std::vector<double> rms_tail_bound;
    std::vector<double> worst_gap_over_tail;        // max over instances of gap / tail bound
    std::vector<std::vector<double>> gaps;          // [m index][instance]
    std::vector<double> direct;                     // per instance

    /// rms_gap[i-1] / rms_gap[i].
    std::vector<double> ratios() const {
        std::vector<double> out;
        for (std::size_t i = 1; i < rms_gap.size(); ++i) out.push_back(rms_gap[i - 1] / rms_gap[i]);
        return out;
    }
};

inline TruncationStudy truncation_study(const CZKernel& K, const Window& window, const Window& support, int coarsest,
                                        const std::vector<int>& m_values, int instances, std::uint64_t seed,
                                        QuadratureOptions quadrature = {}) {
    require(instances >= 1 && !m_values.empty(), "truncation study: need instances and m values");
    TruncationStudy out;
    out.m_values = m_values;
    std::vector<FigielTables> tables;
    for (int M : m_values) {
        FigielOptions o;
        o.m_max = M;
        o.quadrature = quadrature;
        tables.emplace_back(K, coarsest, window.fine, o);
    }
    out.gaps.assign(m_values.size(), {});
    std::vector<double> ss(m_values.size(), 0.0), st(m_values.size(), 0.0);
    out.worst_gap_over_tail.assign(m_values.size(), 0.0);
    CellQuadrature quad(K, window.cell_length(), quadrature);
    for (int i = 0; i < instances; ++i) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
        const GridFunction f = random_supported_function(window, support, 1, rng);
        const GridFunction g = random_supported_function(window, support, 1, rng);
        const DyadicSystem sys(window, sample_beta(mix64(seed + static_cast<std::uint64_t>(i)), coarsest, window.fine, window.dim));
        const double direct = pairing(g, quad, f);
        out.direct.push_back(direct);
        for (std::size_t k = 0; k < tables.size(); ++k) {
            const DecompositionTerms d = decompose(tables[k], f, g, sys);
            const double gap = std::abs(d.total() - direct);
            out.gaps[k].push_back(gap);
            ss[k] += gap * gap;
            st[k] += d.tail_bound * d.tail_bound;
            out.worst_gap_over_tail[k] = std::max(out.worst_gap_over_tail[k], gap / d.tail_bound);
        }
    }
    for (std::size_t k = 0; k < tables.size(); ++k) {
        out.rms_gap.push_back(std::sqrt(ss[k] / instances));
        out.rms_tail_bound.push_back(std::sqrt(st[k] / instances));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Averaging over random systems.

/// Levels whose shift bits decide the goodness of a level-j cube:
/// (j - kmax, j] with kmax the deepest ancestor inspected.
inline std::vector<int> goodness_levels(int level, int jmin, const BadnessParams& p) {
    int kmax = level - jmin;
    if (p.max_depth >= 0) kmax = std::min(kmax, p.max_depth);
    if (kmax < p.r)
        throw RangeError("goodness at level " + std::to_string(level) + " needs ancestors up to k = r");
    return level_span(level - kmax + 1, level);
}

namespace impl {

inline void require_enumerated(const std::vector<int>& needed, const std::vector<int>& enumerated, int level) {
    for (int l : needed)
        if (std::find(enumerated.begin(), enumerated.end(), l) == enumerated.end())
            throw ParameterError("goodness of level " + std::to_string(level) + " depends on shift level " +
                                 std::to_string(l) + ", which is not enumerated");
}

}  // namespace impl

using CubeFunctional = std::function<double(const DyadicCube&)>;

struct AveragingResult {
    double lhs = 0.0;  // sum_j pi_good(j) E sum_{I in D_j} phi(I)
    double rhs = 0.0;  // E sum_{I good} phi(I)
    std::map<int, double> pi_good;
    std::uint64_t states = 0;
};

/// Both sides of pi_good E_beta sum_I phi(I) = E_beta sum_{I good} phi(I) by
/// exact enumeration of the shift bits on `enumerated`, over the cubes of
/// the levels `phi_levels` that meet `window`. phi must depend on the cube's
/// geometry only and vanish on cubes not meeting the window. pi_good is
/// tallied per level in the same enumeration, from the reference cube with
/// corner 0; the enumerated levels must contain every level its goodness
/// depends on.
inline AveragingResult average_good_identity(const CubeFunctional& phi, const Window& window,
                                             const ShiftParameter& base, const std::vector<int>& enumerated,
                                             const std::vector<int>& phi_levels, const BadnessParams& params,
                                             std::uint64_t limit = std::uint64_t{1} << 20) {
    params.validate();
    require(window.dim == base.dim() && window.fine == base.jmax(), "averaging: window does not match the shift");
    for (int j : phi_levels) impl::require_enumerated(goodness_levels(j, base.jmin(), params), enumerated, j);
    std::map<int, double> all;
    std::map<int, std::int64_t> good_ref;
    double good_sum = 0.0;
    AveragingResult out;
    out.states = for_each_shift(
        base, enumerated,
        [&](const ShiftParameter& beta) {
            const DyadicSystem sys(window, beta);
            for (int j : phi_levels) {
                const DyadicCube ref{base.dim(), j, base.jmax(), Coord{}};
                if (!is_bad(shift_cube(ref, beta), params, beta)) ++good_ref[j];
                for (const DyadicCube& q : sys.cubes(j)) {
                    const double v = phi(q);
                    all[j] += v;
                    if (!is_bad(q, params, beta)) good_sum += v;
                }
            }
        },
        limit);
    const double S = static_cast<double>(out.states);
    for (int j : phi_levels) {
        out.pi_good[j] = static_cast<double>(good_ref[j]) / S;
        out.lhs += out.pi_good[j] * all[j] / S;
    }
    out.rhs = good_sum / S;
    return out;
}

/// phi(I) = 1 for level-j cubes meeting `region`.
inline CubeFunctional level_indicator(int level, const Window& region) {
    return [level, region](const DyadicCube& q) { return q.level == level && region.meets(q) ? 1.0 : 0.0; };
}

/// phi(I) = sum_{eta, theta != 0} <g, h^eta_{I+m}> c(m, eta, theta) <h^theta_I, f>.
inline CubeFunctional a_summand(const FigielTables& t, const GridFunction& f, const GridFunction& g, const Coord& m) {
    return [&t, &f, &g, m](const DyadicCube& I) {
        const std::uint32_t types = 1u << I.dim;
        const DyadicCube J = I.translate(m);
        double s = 0.0;
        for (std::uint32_t th = 1; th < types; ++th) {
            const double fv = haar_coefficient(f, {I, th});
            if (fv == 0.0) continue;
            for (std::uint32_t e = 1; e < types; ++e)
                s += haar_coefficient(g, {J, e}) * t.coeff(I.level, m, e, th) * fv;
        }
        return s;
    };
}

/// phi(I) = sum_{theta != 0} (<g, h^0_{I+m}> - <g, h^0_I>) c(m, 0, theta) <h^theta_I, f>.
inline CubeFunctional b0_summand(const FigielTables& t, const GridFunction& f, const GridFunction& g, const Coord& m) {
    return [&t, &f, &g, m](const DyadicCube& I) {
        const std::uint32_t types = 1u << I.dim;
        const DyadicCube J = I.translate(m);
        const double dg = haar_coefficient(g, {J, 0}) - haar_coefficient(g, {I, 0});
        double s = 0.0;
        for (std::uint32_t th = 1; th < types; ++th) s += dg * t.coeff(I.level, m, 0, th) * haar_coefficient(f, {I, th});
        return s;
    };
}

struct ReconstructionConfig {
    /// Shift levels (jmin, jmax]; bits outside `enumerated` are kept.
    ShiftParameter base;
    /// Exact enumeration over these levels; empty selects Monte Carlo over
    /// all bits.
    std::vector<int> enumerated;
    std::int64_t samples = 1000;
    std::uint64_t seed = 1;
    BadnessParams badness{3, 1, 2, 3};
    std::uint64_t limit = std::uint64_t{1} << 20;
};

struct ReconstructionResult {
    /// (1/pi_good) E(A_good + B0_good + C0_good) + E(P + Q + boundary)
    double value = 0.0;
    /// E(total) over the same systems.
    double averaged_total = 0.0;
    double standard_error = 0.0;        // of `value`, Monte Carlo only
    double total_standard_error = 0.0;  // of `averaged_total`
    double pi_good = 0.0;
    double tail_bound = 0.0;  // largest per-system tail bound
    std::uint64_t systems = 0;
    bool monte_carlo = false;
};

/// The good-restricted representation averaged over random systems on the
/// window of f and g. pi_good must be the same at every decomposition level
/// (a finite max_depth makes it so).
inline ReconstructionResult reconstruct_pairing(FigielTables& t, const GridFunction& f, const GridFunction& g,
                                                const ReconstructionConfig& cfg) {
    const ShiftParameter& base = cfg.base;
    const BadnessParams& p = cfg.badness;
    p.validate();
    require(base.jmax() == t.finest() && base.jmin() <= t.coarsest(), "reconstruct: shift levels do not match the tables");
    ReconstructionResult out;
    out.monte_carlo = cfg.enumerated.empty();
    std::vector<double> pis;
    for (int j = t.coarsest(); j < t.finest(); ++j) {
        const auto dep = goodness_levels(j, base.jmin(), p);
        if (!out.monte_carlo) impl::require_enumerated(dep, cfg.enumerated, j);
        pis.push_back(exact_pi_good(base, j, p, dep));
    }
    const auto [lo, hi] = std::minmax_element(pis.begin(), pis.end());
    if (*hi - *lo > 1e-15) throw ParameterError("reconstruct: pi_good differs across levels; bound max_depth");
    out.pi_good = pis.front();
    if (out.pi_good == 0.0) throw ParameterError("reconstruct: every cube is bad for these badness parameters");

    double sx = 0, sxx = 0, sy = 0, syy = 0;
    auto one = [&](const ShiftParameter& beta) {
        const DyadicSystem sys(f.window(), beta);
        const DecompositionTerms d = restrict_to_good(t, f, g, sys, p);
        const double x = d.good_cancellative() / out.pi_good + d.P + d.Q + d.boundary;
        const double y = d.total();
        sx += x;
        sxx += x * x;
        sy += y;
        syy += y * y;
        out.tail_bound = std::max(out.tail_bound, d.tail_bound);
        ++out.systems;
    };
    if (out.monte_carlo) {
        require(cfg.samples >= 2, "reconstruct: need at least two Monte Carlo samples");
        const std::uint32_t full = (1u << base.dim()) - 1;
        std::uniform_int_distribution<std::uint32_t> pick(0, full);
        for (std::int64_t s = 0; s < cfg.samples; ++s) {
            Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(s));
            std::vector<std::uint32_t> masks(base.masks().size());
            for (auto& m : masks) m = pick(rng);
            one(ShiftParameter(base.dim(), base.jmin(), base.jmax(), std::move(masks)));
        }
    } else {
        for_each_shift(base, cfg.enumerated, one, cfg.limit);
    }
    const double N = static_cast<double>(out.systems);
    out.value = sx / N;
    out.averaged_total = sy / N;
    if (out.monte_carlo) {
        out.standard_error = std::sqrt(std::max(0.0, sxx / N - out.value * out.value) / (N - 1.0));
        out.total_standard_error = std::sqrt(std::max(0.0, syy / N - out.averaged_total * out.averaged_total) / (N - 1.0));
    }
    return out;
}

// ---------------------------------------------------------------------------
// The representation as an operator.

/// The bilinear form of `decompose` (all terms, untruncated paraproduct
/// limits) as a sparse matrix between Haar coordinates of one system, so
/// that <g, apply(f)> = decompose(f, g).total() for scalar f, g.
class DyadicRepresentation {
public:
    DyadicRepresentation(FigielTables& t, DyadicSystem sys) : sys_(std::move(sys)) {
        require(t.finest() == sys_.jmax() && t.coarsest() >= sys_.jmin() && t.dim() == sys_.dim(),
                "representation: table levels do not match the system");
        coarsest_ = t.coarsest();
        types_ = 1u << sys_.dim();
        std::size_t off = 0;
        for (int j = coarsest_; j < sys_.jmax(); ++j) {
            grids_.push_back(sys_.level_grid(j));
            offsets_.push_back(off);
            off += static_cast<std::size_t>(grids_.back().size()) * types_;
        }
        size_ = off;
        impl::visit_terms(
            t, sys_, [](int, std::int64_t) { return false; }, [](int, std::int64_t) { return false; },
            [](const DyadicCube&) { return true; },
            [&](Term, int j, int, bool, std::int64_t kg, std::uint32_t tg, std::int64_t kf, std::uint32_t tf,
                double w) {
                if (w != 0.0) entries_.push_back({flat(j, kg, tg), flat(j, kf, tf), w});
            });
    }

    const DyadicSystem& system() const { return sys_; }
    std::size_t nonzeros() const { return entries_.size(); }

    GridFunction apply(const GridFunction& f) const {
        const auto F = coordinates(f);
        std::vector<double> U(size_, 0.0);
        for (const auto& e : entries_) U[e.row] += e.w * F[e.col];
        return synthesize_coordinates(U);
    }

    GridFunction apply_adjoint(const GridFunction& g) const {
        const auto G = coordinates(g);
        std::vector<double> V(size_, 0.0);
        for (const auto& e : entries_) V[e.col] += e.w * G[e.row];
        return synthesize_coordinates(V);
    }

private:
    struct Entry {
        std::size_t row, col;
        double w;
    };

    std::size_t flat(int level, std::int64_t k, std::uint32_t t) const {
        return offsets_[static_cast<std::size_t>(level - coarsest_)] + static_cast<std::size_t>(k) * types_ + t;
    }

    std::vector<double> coordinates(const GridFunction& f) const {
        if (!(f.window() == sys_.window()) || f.value_dim() != 1)
            throw ParameterError("representation: expects a scalar function on the system window");
        const HaarCoefficients c = analyze(f, sys_);
        std::vector<double> out(size_);
        for (int j = coarsest_; j < sys_.jmax(); ++j)
            for (std::int64_t k = 0; k < c.grid(j).size(); ++k)
                for (std::uint32_t t = 0; t < types_; ++t) out[flat(j, k, t)] = c.at(j, k, t);
        return out;
    }

    /// sum U(j, k, t) h^t_{cube(j, k)} restricted to the window.
    GridFunction synthesize_coordinates(const std::vector<double>& U) const {
        GridFunction u(sys_.window(), 1);
        const Window& w = sys_.window();
        const int n = sys_.dim();
        for (std::int64_t c = 0; c < u.cells(); ++c) {
            const Coord cell = w.cell(c);
            double v = 0.0;
            for (int j = coarsest_; j < sys_.jmax(); ++j) {
                const LevelGrid& g = grids_[static_cast<std::size_t>(j - coarsest_)];
                const std::int64_t k = g.index_of_cell(cell);
                const DyadicCube q = g.cube(k);
                std::uint32_t pos = 0;
                for (int i = 0; i < n; ++i)
                    if (cell[i] - q.lo(i) >= q.side() / 2) pos |= 1u << i;
                double s = 0.0;
                for (std::uint32_t t = 0; t < types_; ++t) s += haar_sign(t, pos) * U[flat(j, k, t)];
                v += haar_magnitude(j, n) * s;
            }
            u(c) = v;
        }
        return u;
    }

    DyadicSystem sys_;
    int coarsest_ = 0;
    std::uint32_t types_ = 2;
    std::vector<LevelGrid> grids_;
    std::vector<std::size_t> offsets_;
    std::size_t size_ = 0;
    std::vector<Entry> entries_;
};

struct OperatorNormEstimate {
    double random_max = 0.0;  // max ||T f|| / ||f|| over random inputs
    double power = 0.0;       // power iteration on T^* T
    int trials = 0;
    int iterations = 0;
};

/// Operator norm of the average of the representations on functions
/// supported in `support`: the largest ratio over random Gaussian inputs and
/// the Rayleigh quotient of a power iteration (both lower bounds for the
/// norm of the finite matrix, the second converging to it).
inline OperatorNormEstimate estimate_operator_norm(const std::vector<const DyadicRepresentation*>& ops,
                                                   const Window& support, int trials,
                                                   int iterations, std::uint64_t seed) {
    require(!ops.empty(), "norm estimate: no operators");
    const Window& w = ops.front()->system().window();
    for (const auto* op : ops) require(op->system().window() == w, "norm estimate: operators on different windows");
    auto avg = [&](const GridFunction& x, bool adjoint) {
        GridFunction out(w, 1);
        for (const auto* op : ops) out += adjoint ? op->apply_adjoint(x) : op->apply(x);
        out *= 1.0 / static_cast<double>(ops.size());
        return out;
    };
    auto restrict = [&](GridFunction& x) {
        for (std::int64_t c = 0; c < x.cells(); ++c)
            if (!support.contains_cell(w.cell(c))) x(c) = 0.0;
    };
    OperatorNormEstimate out;
    out.trials = trials;
    out.iterations = iterations;
    Rng rng = make_rng(seed);
    for (int s = 0; s < trials; ++s) {
        const GridFunction f = random_supported_function(w, support, 1, rng);
        out.random_max = std::max(out.random_max, lp_norm(avg(f, false), 2.0) / lp_norm(f, 2.0));
    }
    GridFunction v = random_supported_function(w, support, 1, rng);
    for (int it = 0; it < iterations; ++it) {
        const double nv = lp_norm(v, 2.0);
        v *= 1.0 / nv;
        const GridFunction u = avg(v, false);
        out.power = std::max(out.power, lp_norm(u, 2.0));
        v = avg(u, true);
        restrict(v);
    }
    return out;
}

}  // namespace haardyad

#endif  // HAARDYAD_FIGIEL_HPP
