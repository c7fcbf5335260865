#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "haardyad/kernel.hpp"

using namespace haardyad;

namespace {

// int_0^h int_0^h dx dy / (pi (d + x - y)) from Phi(t) = t log t - t.
double hilbert_cells_exact(double d, double h) {
    if (d == 0.0) return 0.0;
    auto phi = [](double t) { return t == 0.0 ? 0.0 : std::abs(t) * std::log(std::abs(t)) - std::abs(t); };
    // Phi is used through its even extension; the second difference is odd in d.
    const double s = d >= 0 ? 1.0 : -1.0;
    d = std::abs(d);
    return s * (phi(d + h) - 2.0 * phi(d) + phi(d - h)) / std::numbers::pi;
}

// Closed-form <h^eta_{I+m}, H h^theta_I> for I = [0, 2h).
double hilbert_haar_exact(std::int64_t m, std::uint32_t eta, std::uint32_t theta, double h) {
    double s = 0.0;
    for (int pa = 0; pa < 2; ++pa)
        for (int pb = 0; pb < 2; ++pb) {
            const double sa = (eta && pa) ? -1.0 : 1.0;
            const double sb = (theta && pb) ? -1.0 : 1.0;
            s += sa * sb * hilbert_cells_exact((2.0 * m + pa - pb) * h, h);
        }
    return s / (2.0 * h);
}

GridFunction indicator(const Window& w, double a, double b) {
    GridFunction f(w, 1);
    for (std::int64_t c = 0; c < f.cells(); ++c) {
        const double x = w.cell(c)[0] * w.cell_length();
        if (x >= a && x < b) f(c) = 1.0;
    }
    return f;
}

}  // namespace

TEST(Kernel, Registry) {
    EXPECT_EQ(make_kernel("hilbert").dim, 1);
    EXPECT_EQ(make_kernel("odd2d").dim, 2);
    EXPECT_EQ(make_kernel("zero", 2).dim, 2);
    EXPECT_THROW(make_kernel("riesz"), ParameterError);
}

TEST(Kernel, StandardEstimatesSpotChecks) {
    for (const auto& name : kernel_names()) {
        const auto chk = spot_check_estimates(make_kernel(name, 2), 20000, 1);
        EXPECT_LE(chk.worst_size_ratio, 1.0 + 1e-12);
        EXPECT_LE(chk.worst_holder_ratio, 1.0) << name << " " << chk.worst_size_ratio << " " << chk.worst_holder_ratio;
    }
    EXPECT_GT(spot_check_estimates(hilbert_kernel(), 20000, 1).worst_size_ratio, 0.999);
}

TEST(Quadrature, HilbertCellPairsMatchClosedForm) {
    for (double h : {1.0, 0.125}) {
        CellQuadrature q(hilbert_kernel(), h);
        for (std::int64_t d = -40; d <= 40; ++d) {
            if (d == 0) continue;
            const double exact = hilbert_cells_exact(d * h, h);
            EXPECT_NEAR(q({d, 0, 0}), exact, 1e-13 * h) << d;
        }
        EXPECT_EQ(q({0, 0, 0}), 0.0);
    }
}

TEST(Quadrature, AdjacentIntervals) {
    const Window w = Window::cube(1, 3, 0, 16);
    const double v = pairing(indicator(w, 1, 2), hilbert_kernel(), indicator(w, 0, 1));
    EXPECT_NEAR(v, 2.0 * std::numbers::ln2 / std::numbers::pi, 1e-8);
    EXPECT_NEAR(v, 0.4413, 1e-4);
}

TEST(Quadrature, WeakBoundednessOnIdenticalCube) {
    const Window w = Window::cube(1, 4, 0, 32);
    const auto one = indicator(w, 0.5, 1.5);
    EXPECT_NEAR(pairing(one, hilbert_kernel(), one), 0.0, 1e-14);
}

TEST(Quadrature, AntisymmetryOnRandomFunctions) {
    Rng rng = make_rng(3);
    const Window w1 = Window::cube(1, 4, 0, 48);
    const GridFunction f1 = random_grid_function(w1, 2, rng);
    EXPECT_NEAR(pairing(f1, hilbert_kernel(), f1), 0.0, 1e-12);
    const Window w2 = Window::cube(2, 3, 0, 8);
    const GridFunction f2 = random_grid_function(w2, 1, rng);
    EXPECT_NEAR(pairing(f2, odd_kernel_2d(), f2), 0.0, 1e-12);
}

TEST(Quadrature, FarCubesMidpoint) {
    // I = [0,1)^2 at resolution 1/4, J = I + (d, 0).
    const CZKernel K = odd_kernel_2d();
    for (int d : {4, 8, 16}) {
        const Window w{2, 2, {0, 0, 0}, {4 * (d + 1), 4, 0}};
        GridFunction f(w, 1), g(w, 1);
        for (std::int64_t c = 0; c < f.cells(); ++c) {
            const Coord cell = w.cell(c);
            if (cell[0] < 4) f(c) = 1.0;
            if (cell[0] >= 4 * d && cell[0] < 4 * d + 4) g(c) = 1.0;
        }
        const double v = pairing(g, K, f);
        const double mid = K.evaluate({d + 0.5, 0.5, 0}, {0.5, 0.5, 0});
        EXPECT_LE(std::abs(v - mid) / std::abs(mid), 1.0 / (d - 1.0));
    }
}

TEST(Quadrature, RefinementConverges) {
    QuadratureOptions fine{4.0, 1e-15};
    for (const auto& K : {hilbert_kernel(), odd_kernel_2d()}) {
        CellQuadrature base(K, 0.5), ref(K, 0.5, fine), half(K, 0.5, {1.0, 0.5e-13});
        for (std::int64_t a = -3; a <= 3; ++a)
            for (std::int64_t b = (K.dim == 2 ? -3 : 0); b <= (K.dim == 2 ? 3 : 0); ++b) {
                const Coord d{a, b, 0};
                if (a == 0 && b == 0) continue;
                EXPECT_NEAR(base(d), ref(d), 1e-10) << K.name << " " << a << " " << b;
                EXPECT_NEAR(base(d), half(d), 1e-10);
            }
    }
}

TEST(Quadrature, NonAntisymmetricOverlapUnsupported) {
    CZKernel k = hilbert_kernel();
    k.antisymmetric = false;
    CellQuadrature q(k, 1.0);
    EXPECT_THROW(q({0, 0, 0}), UnsupportedError);
    EXPECT_NO_THROW(q({1, 0, 0}));
}

TEST(HaarCoeff, HilbertMatchesClosedForm) {
    const CZKernel H = hilbert_kernel();
    for (int level : {0, 3, -2}) {
        const DyadicCube I{1, level, 8, {0, 0, 0}};
        const double h = 0.5 * I.length();
        for (std::int64_t m = -20; m <= 20; ++m)
            for (std::uint32_t e = 0; e < 2; ++e)
                for (std::uint32_t t = 0; t < 2; ++t) {
                    if (e == 0 && t == 0) continue;
                    EXPECT_NEAR(haar_coeff(H, I, {m, 0, 0}, e, t), hilbert_haar_exact(m, e, t, h), 1e-12);
                }
    }
}

TEST(HaarCoeff, FinerQuadratureOracle) {
    const DyadicCube I{1, 0, 0, {0, 0, 0}};
    const double a = haar_coeff(hilbert_kernel(), I, {4, 0, 0}, 1, 1);
    const double b = haar_coeff(hilbert_kernel(), I, {4, 0, 0}, 1, 1, {10.0, 1e-15});
    EXPECT_NEAR(a, b, 1e-8);
    const DyadicCube Q{2, 0, 0, {0, 0, 0}};
    for (std::uint32_t e : {1u, 2u, 3u}) {
        const double c = haar_coeff(odd_kernel_2d(), Q, {1, 0, 0}, e, 1);
        const double d = haar_coeff(odd_kernel_2d(), Q, {1, 0, 0}, e, 1, {10.0, 1e-15});
        EXPECT_NEAR(c, d, 1e-8);
    }
}

TEST(HaarCoeff, DiagonalVanishesForAntisymmetricKernels) {
    for (std::uint32_t t : {1u, 2u, 3u})
        EXPECT_NEAR(haar_coeff(odd_kernel_2d(), {2, 1, 1, {}}, {0, 0, 0}, t, t), 0.0, 1e-13);
    EXPECT_NEAR(haar_coeff(hilbert_kernel(), {1, 0, 0, {}}, {0, 0, 0}, 1, 1), 0.0, 1e-13);
    EXPECT_THROW(haar_coeff(hilbert_kernel(), {1, 0, 0, {}}, {1, 0, 0}, 0, 0), ParameterError);
}

TEST(HaarCoeff, AntisymmetryOfTable) {
    // <h^eta_{I+m}, T h^theta_I> = -<h^theta_I, T h^eta_{I+m}> = -c(-m, theta, eta)
    const CoeffTable t = coefficient_table(odd_kernel_2d(), 0, 4);
    for (std::size_t k = 0; k < t.translates(); ++k) {
        Coord m = t.translate(k), neg{};
        for (int i = 0; i < 2; ++i) neg[i] = -m[i];
        for (std::uint32_t e = 0; e < 4; ++e)
            for (std::uint32_t th = 0; th < 4; ++th) EXPECT_NEAR(t.at(m, e, th), -t.at(neg, th, e), 1e-14);
    }
}

TEST(Decay, HilbertSlope) {
    const DecayReport r = decay_check(hilbert_kernel(), 0, 64);
    EXPECT_GE(r.fitted_slope, -2.2);
    EXPECT_LE(r.fitted_slope, -1.8);
    EXPECT_LT(r.slope_offset, r.fitted_slope);
    for (std::size_t k = 0; k < r.table.translates(); ++k) {
        const Coord m = r.table.translate(k);
        if (m[0] == 0) continue;
        EXPECT_LE(r.table.max_abs(k), r.fitted_constant * std::pow(1.0 + std::abs(m[0]), -2.0) * (1 + 1e-12));
    }
}

TEST(Decay, DoublingQuartersTheCoefficient) {
    const CoeffTable t = coefficient_table(hilbert_kernel(), 0, 16);
    const double ratio = t.max_abs(t.index({16, 0, 0})) / t.max_abs(t.index({8, 0, 0}));
    EXPECT_NEAR(ratio, 0.25, 0.25 * 0.25);
}

TEST(Decay, ZeroKernel) {
    const DecayReport r = decay_check(zero_kernel(2), 0, 8);
    for (std::size_t k = 0; k < r.table.translates(); ++k) EXPECT_EQ(r.table.max_abs(k), 0.0);
    EXPECT_EQ(r.fitted_constant, 0.0);
}

TEST(Decay, OddKernel2DSlope) {
    const DecayReport r = decay_check(odd_kernel_2d(), 0, 24);
    EXPECT_GE(r.fitted_slope, -3.3);
    EXPECT_LE(r.fitted_slope, -2.7);
}

TEST(Decay, ScaleInvariantEnvelope) {
    const double c0 = decay_check(hilbert_kernel(), 0, 16).fitted_constant;
    for (int level : {-2, 2}) EXPECT_NEAR(decay_check(hilbert_kernel(), level, 16).fitted_constant, c0, 0.1 * c0);
    const double d0 = decay_check(odd_kernel_2d(), 0, 8).fitted_constant;
    for (int level : {-2, 2}) EXPECT_NEAR(decay_check(odd_kernel_2d(), level, 8).fitted_constant, d0, 0.1 * d0);
}

TEST(Summability, ZeroTable) {
    const auto s = summability_check(coefficient_table(zero_kernel(1), 0, 8));
    EXPECT_EQ(s.total, 0.0);
}

TEST(Summability, HilbertConverges) {
    const auto a = summability_check(coefficient_table(hilbert_kernel(), 0, 64));
    const auto b = summability_check(coefficient_table(hilbert_kernel(), 0, 128));
    EXPECT_TRUE(std::isfinite(a.total));
    EXPECT_LT(std::abs(b.total - a.total), a.tail_bound);
    EXPECT_LT(b.tail_bound, a.tail_bound);
    EXPECT_LE(a.partial, b.partial);
}

TEST(Summability, TailBoundDominatesExplicitTail) {
    // Direct sum of the envelope over 64 < |m| <= 100000 in one dimension.
    double direct = 0.0;
    for (int m = 65; m <= 100000; ++m) direct += 2.0 * (1.0 + std::log2(m)) * std::pow(1.0 + m, -2.0);
    const double bound = shell_tail_bound(1, 64, 2.0, true);
    EXPECT_GE(bound, direct);
    EXPECT_LE(bound, 1.2 * direct + 1e-3);
    for (int M = 8; M < 256; M *= 2) EXPECT_GT(shell_tail_bound(2, M, 3.0, true), shell_tail_bound(2, 2 * M, 3.0, true));
}

TEST(CoeffTableCsv, Columns) {
    std::ostringstream os;
    write_table_csv(os, coefficient_table(hilbert_kernel(), 0, 1));
    const std::string s = os.str();
    EXPECT_EQ(s.substr(0, s.find('\n')), "m0,eta0,theta0,value");
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 3 * 3);
}
