#include <gtest/gtest.h>

#include "haardyad/bourgain.hpp"

using namespace haardyad;

namespace {

constexpr double kPi = std::numbers::pi;

// Random values on the central block, zero within `margin` cells of the edge.
GridFunction interior_random(const Window& w, std::int64_t margin, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GridFunction f(w, 1);
    for (std::int64_t c = 0; c < w.cells(); ++c) {
        const Coord cell = w.cell(c);
        bool inside = true;
        for (int i = 0; i < w.dim; ++i) inside = inside && cell[i] - w.lo[i] >= margin && w.hi[i] - 1 - cell[i] >= margin;
        if (inside) f(c) = u(rng);
    }
    return f;
}

GridFunction cosine_mode(const Window& w, double freq) {
    GridFunction f(w, 1);
    for (std::int64_t c = 0; c < w.cells(); ++c)
        f(c) = std::cos(2.0 * kPi * freq * (static_cast<double>(w.cell(c)[0]) + 0.5) * w.cell_length());
    return f;
}

}  // namespace

TEST(Tent, ClosedForms) {
    EXPECT_DOUBLE_EQ(tent({0.25, 0, 0}, 1), 0.75);
    EXPECT_DOUBLE_EQ(tent({0.5, -0.5, 0}, 2), 0.25);
    EXPECT_EQ(tent({1.5, 0, 0}, 1), 0.0);
    EXPECT_DOUBLE_EQ(tent_hat({0, 0, 0}, 2), 1.0);
    EXPECT_NEAR(tent_hat({0.5, 0, 0}, 1), 4.0 / (kPi * kPi), 1e-15);
    EXPECT_NEAR(tent_hat({1.0, 0, 0}, 1), 0.0, 1e-30);
    EXPECT_NEAR(tent_hat({0.5, 0.5, 0}, 2), 16.0 / std::pow(kPi, 4), 1e-15);
}

TEST(Tent, CellWeights) {
    for (std::int64_t K : {1, 2, 8, 64}) {
        const auto w = impl::tent_cell_weights(K);
        double s = 0.0;
        for (double v : w) s += v;
        EXPECT_NEAR(s, 1.0, 1e-14) << K;
        for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i], w[w.size() - 1 - i], 1e-16);
    }
    // K = 1: cell self-weight int (1-|t|)^2 dt = 2/3, neighbours 1/6.
    const auto w1 = impl::tent_cell_weights(1);
    EXPECT_NEAR(w1[1], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(w1[0], 1.0 / 6.0, 1e-15);
}

TEST(Smoothing, ConstantIsReproduced) {
    const Window w = Window::cube(1, 6, 0, 640);
    GridFunction f(w, 1);
    for (std::int64_t c = 128; c < 512; ++c) f(c) = 1.0;
    const auto r = smoothing_average(f, 0, {0, 0, 0}, 6);
    EXPECT_EQ(r.states, 64u);
    for (std::int64_t c = 200; c < 440; ++c) {
        EXPECT_NEAR(r.averaged(c), 1.0, 1e-13);
        EXPECT_NEAR(r.convolution(c), 1.0, 1e-13);
    }
}

TEST(Smoothing, EnumerationMatchesConvolution1D) {
    const Window w = Window::cube(1, 6, 0, 16 * 64);
    const GridFunction f = interior_random(w, 5 * 64, 3);
    for (std::int64_t m : {0, 1, -2, 3}) {
        const auto r = smoothing_average(f, 0, {m, 0, 0}, 6);
        EXPECT_LE(r.max_deviation(), 1e-10) << m;
        EXPECT_NEAR(integral(r.averaged)[0], integral(f)[0], 1e-10);
    }
    const auto r = smoothing_average(f, 2, {-3, 0, 0}, 4);
    EXPECT_EQ(r.states, 16u);
    EXPECT_LE(r.max_deviation(), 1e-10);
}

TEST(Smoothing, EnumerationMatchesConvolution2D) {
    const Window w = Window::cube(2, 4, 0, 6 * 16);
    const GridFunction f = interior_random(w, 3 * 16, 5);
    const auto r = smoothing_average(f, 0, {1, -1, 0}, 4);
    EXPECT_EQ(r.states, 256u);
    EXPECT_LE(r.max_deviation(), 1e-10);
}

TEST(Smoothing, ParameterChecks) {
    const Window w = Window::cube(1, 4, 0, 96);
    GridFunction f(w, 1);
    f(2) = 1.0;
    EXPECT_THROW(smoothing_average(f, 0, {0, 0, 0}, 4), ParameterError);
    f(2) = 0.0;
    f(48) = 1.0;
    EXPECT_THROW(smoothing_average(f, 0, {0, 0, 0}, 3), ParameterError);
    EXPECT_THROW(smoothing_average(f, 0, {3, 0, 0}, 4), ParameterError);
    EXPECT_NO_THROW(smoothing_average(f, 0, {1, 0, 0}, 4));
}

TEST(DyadicTranslate, CubeAveragesMoveByWholeCubes) {
    const Window w = Window::cube(1, 4, 0, 64);
    const DyadicSystem sys(w, ShiftParameter(1, 0, 4));
    GridFunction f(w, 1);
    for (std::int64_t c = 16; c < 24; ++c) f(c) = 2.0;  // half of [16, 32)
    const GridFunction g = dyadic_translate(f, 0, {1, 0, 0}, sys);
    for (std::int64_t c = 0; c < 64; ++c) EXPECT_DOUBLE_EQ(g(c), (c >= 32 && c < 48) ? 1.0 : 0.0) << c;
    EXPECT_THROW(dyadic_translate(f, 0, {3, 0, 0}, sys), ParameterError);
}

TEST(DyadicTranslate, GoodAndBadSplitTheSum) {
    const Window w = Window::cube(1, 10, 0, 1024);
    const DyadicSystem sys(w, sample_beta(9, 0, 10, 1));
    const BadnessParams params{2, 1, 2};
    std::vector<GridFunction> fs;
    std::vector<int> levels{4, 6, 8};
    std::vector<Coord> ms{{1, 0, 0}, {-2, 0, 0}, {3, 0, 0}};
    for (int k = 0; k < 3; ++k) fs.push_back(interior_random(w, 256, 20 + k));
    const auto all = dyadic_translate_sum(fs, levels, ms, sys);
    const auto good = dyadic_translate_sum(fs, levels, ms, sys, CubeSelection::Good, params);
    const auto bad = dyadic_translate_sum(fs, levels, ms, sys, CubeSelection::Bad, params);
    bool some_bad = false;
    for (int k = 0; k < 3; ++k) {
        EXPECT_LE(max_abs_difference(good[k] + bad[k], all[k]), 1e-15);
        some_bad = some_bad || lp_norm(bad[k], 2.0) > 0.0;
    }
    EXPECT_TRUE(some_bad);
}

TEST(Periodic, TranslationAndSmoothingOfAMode) {
    const Window w = Window::cube(1, 5, 0, 256);  // period 8
    const GridFunction f = cosine_mode(w, 3.0 / 8.0 * 4);
    EXPECT_LE(max_abs_difference(translate_periodic(f, {0.25, 0, 0}), cyclic_shift(f, {8, 0, 0})), 1e-13);
    const GridFunction s = smooth_periodic(f, 0.5);
    GridFunction expect = f;
    expect *= tent_hat({0.5 * 1.5, 0, 0}, 1);
    EXPECT_LE(max_abs_difference(s, expect), 1e-13);
    EXPECT_LE(spectral_leakage(f, 1.5), 1e-20);
    EXPECT_NEAR(spectral_leakage(f, 1.4), 1.0, 1e-14);
}

TEST(Bandlimited, FamilyIsNormalisedAndInBand) {
    const Window w = Window::cube(2, 4, 0, 64);
    const auto fam = make_bandlimited_family(w, {0, 1, 2, 3}, 2, 7);
    ASSERT_EQ(fam.f.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_NEAR(lp_norm(fam.f[k], 2.0), 1.0, 1e-12);
        EXPECT_LE(spectral_leakage(fam.f[k], BandlimitedFamily::band_radius(fam.levels[k])), 1e-12);
    }
    EXPECT_THROW(make_bandlimited_family(w, {4}, 1, 1), ParameterError);
}

TEST(Chi, InvertsTheTentOnTheBand) {
    const ChiProfile chi = build_chi();
    for (double t = 0.0; t <= 0.5; t += 1.0 / 64) {
        EXPECT_NEAR(chi.chi({t, 0, 0}, 1) * tent_hat({t, 0, 0}, 1), 1.0, 1e-12);
        EXPECT_NEAR(chi.chi({t * 0.6, -t * 0.8, 0}, 2) * tent_hat({t * 0.6, -t * 0.8, 0}, 2), 1.0, 1e-12);
    }
    EXPECT_EQ(chi.chi({0.9, 0, 0}, 1), 0.0);
    EXPECT_EQ(chi.chi({0.7, 0.7, 0}, 2), 0.0);
    double prev = 1.0;
    for (double t = 0.0; t <= 1.0; t += 0.01) {
        const double s = ChiProfile::step(t);
        EXPECT_LE(s, prev + 1e-15);
        prev = s;
    }
    EXPECT_NEAR(ChiProfile::step(0.5), 0.5, 1e-15);
}

TEST(Chi, SplitTranslation) {
    auto [m, z] = split_translation({2.4, 2.5, -0.5}, 3);
    EXPECT_EQ(m[0], 2);
    EXPECT_EQ(m[1], 3);
    EXPECT_EQ(m[2], 0);
    EXPECT_NEAR(z[0], 0.4, 1e-15);
    EXPECT_DOUBLE_EQ(z[1], -0.5);
    EXPECT_DOUBLE_EQ(z[2], -0.5);
}

TEST(Chi, VariationIsUniformInTheFraction) {
    const ChiProfile chi = build_chi();
    Rng rng = make_rng(4);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int dim : {1, 2}) {
        double lo = INFINITY, hi = 0.0;
        for (int t = 0; t < 16; ++t) {
            const double v = multiplier_variation(chi, {u(rng), u(rng), 0}, dim, dim == 1 ? 4000 : 400);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        EXPECT_LE(hi / lo, 2.0) << dim;
    }
}

TEST(Pipeline, TranslationFactorsThroughSmoothing) {
    const Window w = Window::cube(1, 5, 0, 4096);  // period 128, Nyquist 16
    const std::vector<int> levels{0, 1, 2, 3, 4};
    const auto fam = make_bandlimited_family(w, levels, 1, 12);
    std::vector<RealVec> ys{{2.4, 0, 0}, {-7.5, 0, 0}, {0.3, 0, 0}, {13.49, 0, 0}, {-1.2, 0, 0}};
    const auto r = pipeline_check(fam, ys, build_chi());
    EXPECT_LE(r.relative_error, 1e-6);
    EXPECT_LE(r.leakage, 1e-12);

    const Window w2 = Window::cube(2, 3, 0, 64);
    const auto fam2 = make_bandlimited_family(w2, {0, 1, 2}, 2, 13);
    const auto r2 = pipeline_check(fam2, {{0.6, -1.3, 0}, {2.2, 0.1, 0}, {-0.4, 3.5, 0}}, build_chi());
    EXPECT_LE(r2.relative_error, 1e-6);
    EXPECT_LE(r2.leakage, 1e-12);
}

TEST(RandomizedNorm, ExhaustiveL2IsOrthogonal) {
    const Window w = Window::cube(1, 4, 0, 64);
    const auto fam = make_bandlimited_family(w, {0, 1, 2}, 1, 3);
    std::vector<GridFunction> gs = fam.f;
    gs[1] *= 2.0;
    const auto r = randomized_norm(gs, SignEnsemble::exhaustive(), 2.0);
    EXPECT_EQ(r.patterns, 8);
    EXPECT_NEAR(r.value, std::sqrt(6.0), 1e-12);
    EXPECT_EQ(r.standard_error, 0.0);
    const auto s = randomized_norm(gs, SignEnsemble::sampled(200, 5), 4.0);
    EXPECT_EQ(s.patterns, 200);
    EXPECT_GT(s.standard_error, 0.0);
    EXPECT_THROW(randomized_norm(gs, SignEnsemble::exhaustive(), 0.5), ParameterError);
}

TEST(Translation, L2RatioIsOne) {
    TranslationConfig cfg;
    cfg.p = 2.0;
    cfg.J = 4;
    cfg.samples = 0;
    cfg.ys = {0, 2, 8};
    cfg.domain_factor = 8;
    const auto rep = translation_experiment(cfg);
    for (double r : rep.ratio) EXPECT_NEAR(r, 1.0, 1e-12);
    EXPECT_NEAR(rep.envelope[2], 0.25, 1e-12);
    cfg.max_cells = 16;
    EXPECT_THROW(translation_experiment(cfg), ResourceError);
}

TEST(Stein, ConditionalExpectationsAreBounded) {
    const Window w = Window::cube(1, 6, 0, 64 * 64);
    const DyadicSystem sys(w, ShiftParameter(1, 0, 6));
    const auto fam = make_bandlimited_family(w, {0, 1, 2, 3, 4, 5}, 1, 21);
    const auto l2 = stein_check(fam, sys, 2.0, SignEnsemble::exhaustive());
    EXPECT_LE(l2.ratio, 1.0 + 1e-12);
    const auto l4 = stein_check(fam, sys, 4.0, SignEnsemble::sampled(200, 2));
    EXPECT_LE(l4.ratio, 3.05);
    EXPECT_GT(l4.ratio, 0.1);
}

TEST(RandomizedNorm, SingleFunctionIsItsNorm) {
    const Window w = Window::cube(1, 4, 0, 64);
    const auto fam = make_bandlimited_family(w, {2}, 1, 8);
    for (double p : {1.5, 4.0}) {
        EXPECT_NEAR(randomized_norm(fam.f, SignEnsemble::exhaustive(), p).value, lp_norm(fam.f[0], p), 1e-13);
        EXPECT_NEAR(randomized_norm(fam.f, SignEnsemble::sampled(7, 1), p).value, lp_norm(fam.f[0], p), 1e-13);
    }
}

TEST(RandomizedNorm, SampledAgreesWithExhaustive) {
    const Window w = Window::cube(1, 5, 0, 512);
    const auto fam = make_bandlimited_family(w, level_span(0, 4), 1, 9);
    std::vector<GridFunction> gs = fam.f;
    for (int k = 0; k < 3; ++k) gs.push_back(fam.f[static_cast<std::size_t>(k)] + fam.f[static_cast<std::size_t>(k + 2)]);
    ASSERT_EQ(gs.size(), 8u);
    const auto exact = randomized_norm(gs, SignEnsemble::exhaustive(), 4.0);
    const auto mc = randomized_norm(gs, SignEnsemble::sampled(1000, 3), 4.0);
    EXPECT_GT(mc.standard_error, 0.0);
    EXPECT_LE(std::abs(mc.value - exact.value), 3.0 * mc.standard_error);
}

TEST(RandomizedNorm, Contraction) {
    const Window w = Window::cube(1, 4, 0, 128);
    const auto fam = make_bandlimited_family(w, {0, 1, 2, 3}, 1, 10);
    const std::vector<double> a{0.3, -1.0, 0.7, -0.2};
    std::vector<GridFunction> scaled = fam.f;
    for (std::size_t k = 0; k < a.size(); ++k) scaled[k] *= a[k];
    for (double p : {1.5, 2.0, 4.0}) {
        const double lhs = randomized_norm(scaled, SignEnsemble::exhaustive(), p).value;
        const double rhs = randomized_norm(fam.f, SignEnsemble::exhaustive(), p).value;
        EXPECT_LE(lhs, rhs * (1.0 + 1e-12)) << p;
    }
}

TEST(Stein, MeasurableFunctionsAreFixed) {
    const Window w = Window::cube(1, 4, 0, 64);
    const DyadicSystem sys(w, ShiftParameter(1, 0, 4));
    BandlimitedFamily fam{w, {1, 2}, {}};
    for (int k = 0; k < 2; ++k) fam.f.push_back(project(interior_random(w, 0, 30 + k), fam.levels[static_cast<std::size_t>(k)], sys));
    const auto r = stein_check(fam, sys, 4.0, SignEnsemble::exhaustive());
    EXPECT_NEAR(r.ratio, 1.0, 1e-13);
}
