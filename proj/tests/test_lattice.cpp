#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "haardyad/lattice.hpp"

using namespace haardyad;

namespace {

DyadicCube cube1(int level, int fine, std::int64_t corner) { return {1, level, fine, {corner, 0, 0}}; }

// Badness decided with plain floating point directly from the definition.
bool float_is_bad(const DyadicCube& q, const BadnessParams& p, const ShiftParameter& beta) {
    const double h = std::ldexp(1.0, -q.fine);
    for (int k = p.r; k <= q.level - beta.jmin(); ++k) {
        const DyadicCube J = ancestor(q, k, beta);
        double d = 1e300;
        for (int i = 0; i < q.dim; ++i) {
            d = std::min(d, (q.lo(i) - J.lo(i)) * h);
            d = std::min(d, (J.hi(i) - q.hi(i)) * h);
        }
        const double thr = std::pow(q.length(), p.gamma()) * std::pow(J.length(), 1.0 - p.gamma());
        if (d <= thr * (1 + 1e-12)) return true;
    }
    return false;
}

}  // namespace

TEST(ShiftParameter, SameSeedSameBits) {
    EXPECT_EQ(sample_beta(42, -3, 9, 2), sample_beta(42, -3, 9, 2));
    EXPECT_FALSE(sample_beta(42, -3, 9, 2) == sample_beta(43, -3, 9, 2));
}

TEST(ShiftParameter, BitFrequencies) {
    const int trials = 100000;
    std::vector<int> ones(20, 0);
    for (int s = 0; s < trials; ++s) {
        const auto b = sample_beta(static_cast<std::uint64_t>(s), 0, 20, 1);
        for (int l = 1; l <= 20; ++l) ones[l - 1] += b.bit(l, 0);
    }
    const double se = std::sqrt(0.25 / trials);
    for (int c : ones) EXPECT_NEAR(static_cast<double>(c) / trials, 0.5, 3 * se + 1e-3);
}

TEST(ShiftParameter, RejectsBadInput) {
    EXPECT_THROW(sample_beta(1, 3, 3, 1), ParameterError);
    EXPECT_THROW(sample_beta(1, 5, 3, 1), ParameterError);
    EXPECT_THROW(ShiftParameter(1, 0, 2, {0u, 2u}), ParameterError);
    EXPECT_THROW(ShiftParameter(2, 0, 2, {0u}), ParameterError);
}

TEST(ShiftCube, SingleTerm) {
    ShiftParameter beta(1, 0, 1, {1u});
    const DyadicCube q = shift_cube(cube1(0, 1, 0), beta);
    EXPECT_EQ(q.lo(0), 1);  // 1/2 in units of 1/2
    EXPECT_EQ(q.hi(0), 3);
}

TEST(ShiftCube, ZeroShiftIsIdentity) {
    ShiftParameter beta(2, -2, 5);
    DyadicCube q{2, 1, 5, {16, -32, 0}};
    EXPECT_EQ(shift_cube(q, beta), q);
}

TEST(ShiftCube, ShiftedSystemIsNested) {
    // Every I + beta lies in exactly one shifted cube of each coarser level.
    const ShiftParameter base(1, 0, 4);
    for_each_shift(base, level_span(1, 4), [&](const ShiftParameter& beta) {
        for (int lj = 0; lj <= 4; ++lj)
            for (int li = lj; li <= 4; ++li)
                for (std::int64_t a = -pow2(li); a < 2 * pow2(li); ++a) {
                    const DyadicCube I = shift_cube(cube1(li, 4, a * pow2(4 - li)), beta);
                    int parents = 0;
                    for (std::int64_t b = -pow2(lj) - 1; b < 2 * pow2(lj) + 1; ++b) {
                        const DyadicCube J = shift_cube(cube1(lj, 4, b * pow2(4 - lj)), beta);
                        if (J.contains(I)) ++parents;
                        else EXPECT_FALSE(J.intersects(I));
                    }
                    EXPECT_EQ(parents, 1);
                }
    });
}

TEST(ShiftCube, CubeMapDoesNotPreserveNesting) {
    // [0,1/2) + beta = [0,1/2) but [0,1) + beta = [1/2,3/2) when only beta_1 = 1.
    const ShiftParameter beta(1, 0, 2, {1u, 0u});
    const DyadicCube I = shift_cube(cube1(1, 2, 0), beta);
    const DyadicCube J = shift_cube(cube1(0, 2, 0), beta);
    EXPECT_EQ(I.lo(0), 0);
    EXPECT_EQ(J.lo(0), 2);
    EXPECT_FALSE(J.contains(I));
}

TEST(ShiftCube, MissingLevels) {
    ShiftParameter beta(1, 2, 5);
    EXPECT_THROW(shift_cube(cube1(1, 5, 0), beta), ParameterError);
    EXPECT_THROW(shift_cube(cube1(3, 6, 0), beta), ParameterError);
}

TEST(Ancestor, Basics) {
    ShiftParameter zero(1, 0, 1);
    const DyadicCube I = cube1(1, 1, 0);
    EXPECT_EQ(ancestor(I, 0, zero), I);
    EXPECT_EQ(ancestor(I, 1, zero), cube1(0, 1, 0));
    EXPECT_THROW(ancestor(I, 2, zero), RangeError);
}

TEST(Ancestor, ContainsCube) {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto beta = sample_beta(s, -4, 8, 2);
        Rng rng = make_rng(s, 99);
        std::uniform_int_distribution<std::int64_t> pos(-500, 500);
        std::uniform_int_distribution<int> lev(-4, 8);
        const int level = lev(rng);
        const DyadicCube I = cube_containing({pos(rng), pos(rng), 0}, level, beta);
        for (int k = 0; k <= level + 4; ++k) {
            const DyadicCube J = ancestor(I, k, beta);
            EXPECT_EQ(J.level, level - k);
            EXPECT_TRUE(belongs(J, beta));
            EXPECT_TRUE(J.contains(I));
        }
    }
}

TEST(Distance, Examples) {
    EXPECT_EQ(dist_to_complement(cube1(2, 2, 1), cube1(0, 2, 0)), 1);  // 1/4 in units of 1/4
    EXPECT_EQ(dist_to_complement(cube1(2, 2, 0), cube1(0, 2, 0)), 0);
    EXPECT_THROW(dist_to_complement(cube1(0, 2, 0), cube1(2, 2, 0)), ParameterError);
}

TEST(Distance, MatchesFloatOracle) {
    Rng rng = make_rng(7);
    for (int t = 0; t < 500; ++t) {
        const int fine = 10;
        std::uniform_int_distribution<int> lev(0, 6);
        const int lj = lev(rng);
        const int li = lj + std::uniform_int_distribution<int>(0, 4)(rng);
        DyadicCube J{2, lj, fine, {}};
        DyadicCube I{2, li, fine, {}};
        std::uniform_int_distribution<std::int64_t> k(0, pow2(li - lj) - 1);
        for (int i = 0; i < 2; ++i) I.corner[i] = k(rng) * I.side();
        const double h = std::ldexp(1.0, -fine);
        double oracle = 1e9;
        for (int i = 0; i < 2; ++i) {
            const double a = I.corner[i] * h, b = a + I.length();
            oracle = std::min({oracle, a - 0.0, J.length() - b});
        }
        EXPECT_NEAR(dist_to_complement(I, J) * h, oracle, 1e-12);
    }
}

TEST(Badness, SmallRMakesEverythingBad) {
    // With gamma = 1/2 and r <= 2 the test at k = r always fires.
    const ShiftParameter beta = sample_beta(5, 0, 6, 1);
    for (int r : {1, 2})
        for (std::int64_t a = 0; a < 64; ++a)
            EXPECT_TRUE(is_bad(cube_containing({a, 0, 0}, 6, beta), {r, 1, 2}, beta));
}

TEST(Badness, BoundaryCubesAreBad) {
    ShiftParameter zero(1, 0, 2);
    EXPECT_TRUE(is_bad(cube1(2, 2, 0), {1, 1, 2}, zero));
    EXPECT_TRUE(is_bad(cube1(2, 2, 3), {2, 1, 2}, zero));
}

TEST(Badness, UndecidableWithoutAncestors) {
    ShiftParameter zero(1, 0, 4);
    EXPECT_THROW(is_bad(cube1(2, 4, 0), {3, 1, 2}, zero), RangeError);
    EXPECT_THROW(is_bad(cube1(2, 4, 0), {1, 0, 2}, zero), ParameterError);
}

TEST(Badness, ExhaustiveScanAgreesWithFloatOracle) {
    const ShiftParameter beta(1, 0, 6);
    const BadnessParams p{3, 1, 2};
    int good = 0;
    for (int level = 3; level <= 6; ++level)
        for (std::int64_t a = 0; a < pow2(level); ++a) {
            const DyadicCube I = cube1(level, 6, a * pow2(6 - level));
            const bool bad = is_bad(I, p, beta);
            EXPECT_EQ(bad, float_is_bad(I, p, beta)) << level << " " << a;
            if (!bad) ++good;
        }
    EXPECT_GT(good, 0);
}

TEST(Badness, ExactComparisonAtTheThreshold) {
    // gamma = 1/2, k = 2: threshold is side * 2 exactly, attained by dist.
    const ShiftParameter zero(1, 0, 4);
    EXPECT_TRUE(impl::within_badness_threshold(2, 1, 2, {1, 1, 2}));
    EXPECT_FALSE(impl::within_badness_threshold(3, 1, 2, {1, 1, 2}));
    // gamma = 1/3, k = 3: threshold 2^2 = 4.
    EXPECT_TRUE(impl::within_badness_threshold(4, 1, 3, {1, 1, 3}));
    EXPECT_FALSE(impl::within_badness_threshold(5, 1, 3, {1, 1, 3}));
}

TEST(PiBadBound, ClosedForm) {
    const double expect = 4.0 * std::exp2(-8.0) / (1.0 - 1.0 / std::sqrt(2.0));
    EXPECT_NEAR(pi_bad_bound(1, {16, 1, 2}), expect, 1e-15);
    EXPECT_NEAR(expect, 0.0534, 1e-4);
    EXPECT_NEAR(pi_bad_bound(1, {18, 1, 2}), 0.5 * expect, 1e-15);
    EXPECT_NEAR(pi_bad_bound(2, {16, 1, 2}), 2.0 * expect, 1e-15);
}

TEST(PiBadBound, DefaultR) {
    const int r = default_r(1, 1, 2);
    EXPECT_LT(pi_bad_bound(1, {r, 1, 2}), 0.5);
    EXPECT_GE(pi_bad_bound(1, {r - 1, 1, 2}), 0.5);
}

TEST(EstimatePiBad, BelowBound) {
    const BadnessParams p{8, 1, 2};
    const auto e = estimate_pi_bad(1, p, 20000, 3);
    EXPECT_LE(e.mean, pi_bad_bound(1, p) + 3 * e.standard_error);
    EXPECT_NEAR(e.standard_error, std::sqrt(e.mean * (1 - e.mean) / e.trials), 1e-15);
    EXPECT_GT(e.truncation_tail, 0.0);
}

TEST(EstimatePiBad, SingleTrial) {
    const auto e = estimate_pi_bad(1, {4, 1, 2}, 1, 11);
    EXPECT_TRUE(e.mean == 0.0 || e.mean == 1.0);
}

TEST(EstimatePiBad, Deterministic) {
    const auto a = estimate_pi_bad(2, {6, 1, 2}, 2000, 5);
    const auto b = estimate_pi_bad(2, {6, 1, 2}, 2000, 5);
    EXPECT_EQ(a.mean, b.mean);
}

TEST(Independence, ExactFactorization) {
    // Six shift levels (-3, 3]; badness uses levels <= 0, position levels > 0.
    const auto tab = badness_position_independence(1, {3, 1, 2}, -3, 0, 3);
    EXPECT_EQ(tab.states, 64);
    EXPECT_EQ(tab.p_offset.size(), 8u);
    EXPECT_NEAR(tab.p_bad, 6.0 / 8.0, 1e-15);
    EXPECT_LE(tab.max_deviation, 1e-12);
}

TEST(Independence, TwoDimensions) {
    const auto tab = badness_position_independence(2, {3, 1, 2}, -3, 0, 2);
    EXPECT_LE(tab.max_deviation, 1e-12);
    EXPECT_GT(tab.p_bad, 0.0);
    EXPECT_LT(tab.p_bad, 1.0);
}

TEST(Independence, PiGoodComplement) {
    const ShiftParameter base(1, -3, 3);
    const double good = exact_pi_good(base, 0, {3, 1, 2}, level_span(-2, 3));
    const auto tab = badness_position_independence(1, {3, 1, 2}, -3, 0, 3);
    EXPECT_NEAR(good, 1.0 - tab.p_bad, 1e-15);
}

TEST(System, LevelsTileTheWindow) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto beta = sample_beta(s, -1, 5, 2);
        const Window w{2, 5, {3, -7, 0}, {40, 21, 0}};
        const DyadicSystem sys(w, beta);
        for (int j = -1; j <= 5; ++j) {
            const LevelGrid g = sys.level_grid(j);
            std::vector<int> hits(static_cast<std::size_t>(w.cells()), 0);
            for (const DyadicCube& q : sys.cubes(j)) {
                EXPECT_TRUE(sys.contains(q));
                EXPECT_TRUE(w.meets(q));
                for (std::int64_t c = 0; c < w.cells(); ++c)
                    if (q.contains_point(w.cell(c))) ++hits[static_cast<std::size_t>(c)];
            }
            for (int h : hits) EXPECT_EQ(h, 1);
            for (std::int64_t k = 0; k < g.size(); ++k) EXPECT_EQ(g.index(g.cube(k)), k);
        }
    }
}

TEST(System, EnumerationLimit) {
    const ShiftParameter base(2, 0, 20);
    EXPECT_THROW(for_each_shift(base, level_span(1, 20), [](const ShiftParameter&) {}, 1 << 20),
                 ResourceError);
}
