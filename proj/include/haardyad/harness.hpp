#ifndef HAARDYAD_HARNESS_HPP
#define HAARDYAD_HARNESS_HPP

// Experiment configuration, named check suites and JSON reports. Each check
// carries the acceptance criterion it belongs to, its statistic and its
// threshold.

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "haardyad/bourgain.hpp"
#include "haardyad/figiel.hpp"
#include "haardyad/martingale.hpp"
#include "json.hpp"

namespace haardyad {

struct ExperimentConfig {
    int n = 1;
    int jmin = 0;
    int jmax = 6;
    std::int64_t window_cells = 1024;
    int gamma_num = 1;
    int gamma_den = 2;
    int r = 0;  // 0: smallest r with pi_bad_bound < 1/2
    double p = 4.0;
    int value_dim = 1;
    int m_max = 16;
    std::int64_t trials = 0;  // 0: each check's own default
    std::uint64_t seed = 1;
    std::string kernel = "hilbert";
    std::string output;

    BadnessParams badness() const {
        return {r > 0 ? r : default_r(n, gamma_num, gamma_den), gamma_num, gamma_den};
    }
    std::int64_t trials_or(std::int64_t fallback) const { return trials > 0 ? trials : fallback; }

    void validate() const {
        require(n >= 1 && n <= kMaxDim, "config: n must lie in 1.." + std::to_string(kMaxDim));
        require(jmin < jmax && jmax - jmin <= 40, "config: need jmin < jmax with at most 40 levels");
        require(window_cells >= 1, "config: window size must be positive");
        require(gamma_num > 0 && gamma_num < gamma_den, "config: gamma must lie in (0, 1)");
        require(r >= 0, "config: r must be >= 0");
        require(p > 1.0 && std::isfinite(p), "config: p must lie in (1, inf)");
        require(value_dim >= 1, "config: value dimension must be >= 1");
        require(m_max >= 1, "config: m_max must be >= 1");
        require(trials >= 0, "config: trials must be >= 0");
        make_kernel(kernel, n);
    }

    nlohmann::json to_json() const {
        return {{"n", n},         {"jmin", jmin},           {"jmax", jmax},        {"window_cells", window_cells},
                {"gamma", std::to_string(gamma_num) + "/" + std::to_string(gamma_den)},
                {"r", badness().r}, {"p", p},               {"value_dim", value_dim}, {"m_max", m_max},
                {"trials", trials}, {"seed", seed},         {"kernel", kernel},    {"output", output}};
    }
};

/// Parses "a/b" into a rational in (0, 1).
inline std::pair<int, int> parse_gamma(const std::string& s) {
    const auto slash = s.find('/');
    require(slash != std::string::npos, "gamma must be written a/b");
    const int a = std::stoi(s.substr(0, slash)), b = std::stoi(s.substr(slash + 1));
    require(a > 0 && a < b, "gamma must lie in (0, 1)");
    return {a, b};
}

/// Parses "lo..hi".
inline std::pair<int, int> parse_range(const std::string& s) {
    const auto dots = s.find("..");
    require(dots != std::string::npos, "level range must be written lo..hi");
    return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
}

struct CheckRecord {
    std::string name;
    int criterion = 0;
    double statistic = 0.0;
    std::string op = "<=";
    double threshold = 0.0;
    bool pass = false;
    std::string error;

    static CheckRecord le(std::string name, int criterion, double stat, double thr) {
        return {std::move(name), criterion, stat, "<=", thr, stat <= thr, {}};
    }
    static CheckRecord ge(std::string name, int criterion, double stat, double thr) {
        return {std::move(name), criterion, stat, ">=", thr, stat >= thr, {}};
    }

    nlohmann::json to_json() const {
        nlohmann::json j{{"name", name}, {"criterion", criterion}, {"op", op}, {"threshold", threshold}, {"pass", pass}};
        j["statistic"] = std::isfinite(statistic) ? nlohmann::json(statistic) : nlohmann::json(nullptr);
        if (!error.empty()) j["error"] = error;
        return j;
    }
};

struct Report {
    std::string experiment;
    nlohmann::json config;
    std::vector<CheckRecord> checks;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;

    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return !checks.empty();
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : checks) arr.push_back(c.to_json());
        return {{"experiment", experiment}, {"config", config}, {"checks", arr},
                {"pass", pass()},           {"seed", seed},     {"wall_seconds", wall_seconds}};
    }
};

// ---------------------------------------------------------------------------
// Checks.

namespace checks {

using Records = std::vector<CheckRecord>;

inline Records pi_bad(const ExperimentConfig& cfg) {
    Records out;
    const std::int64_t trials = cfg.trials_or(100000);
    const std::array<std::pair<int, int>, 3> cases{{{1, 8}, {1, 16}, {2, 16}}};
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto [n, r] = cases[i];
        const BadnessParams p{r, 1, 2};
        const auto e = estimate_pi_bad(n, p, trials, mix64(cfg.seed + i));
        out.push_back(CheckRecord::le("pi_bad n=" + std::to_string(n) + " r=" + std::to_string(r), 1, e.mean,
                                      pi_bad_bound(n, p) + 3.0 * e.standard_error));
    }
    return out;
}

inline Records independence(const ExperimentConfig&) {
    const auto tab = badness_position_independence(1, {3, 1, 2}, -3, 0, 3);
    return {CheckRecord::le("badness/position factorization, 6 levels", 2, tab.max_deviation, 1e-12)};
}

inline Records haar_algebra(const ExperimentConfig& cfg) {
    Records out;
    {
        // one level-0 cube: 2^6 indices
        const ShiftParameter beta = sample_beta(cfg.seed, 0, 6, 1);
        const DyadicSystem sys(Window::cube(1, 6, beta.offset(0)[0], 64), beta);
        std::vector<HaarIndex> idx;
        for (const auto& q : sys.cubes(0)) idx.push_back({q, 0});
        for (int j = 0; j < 6; ++j)
            for (const auto& q : sys.cubes(j)) idx.push_back({q, 1});
        std::vector<GridFunction> fs;
        for (const auto& h : idx) fs.push_back(haar_function(h, sys.window()));
        double worst = 0.0;
        for (std::size_t a = 0; a < fs.size(); ++a)
            for (std::size_t b = 0; b < fs.size(); ++b)
                worst = std::max(worst, std::abs(inner_product(fs[a], fs[b]) - (a == b ? 1.0 : 0.0)));
        out.push_back(CheckRecord::le("orthonormality on " + std::to_string(idx.size()) + " Haar functions", 3, worst, 1e-12));
    }
    const DyadicSystem sys(Window::cube(1, 10, 0, 1024), sample_beta(cfg.seed + 1, 0, 10, 1));
    Rng rng = make_rng(cfg.seed, 3);
    const GridFunction f = random_grid_function(sys.window(), 1, rng);
    out.push_back(CheckRecord::le("analyze/synthesize roundtrip, 1024 cells", 3,
                                  max_abs_difference(synthesize(analyze(f, sys), sys), f), 1e-12));
    double worst = 0.0;
    for (int j = sys.jmin(); j < sys.jmax(); ++j)
        worst = std::max(worst, max_abs_difference(project(f, j + 1, sys), project(f, j, sys) + detail(f, j, sys)));
    out.push_back(CheckRecord::le("E_{j+1} = E_j + D_j", 3, worst, 1e-12));
    return out;
}

inline Records decay(const ExperimentConfig&) {
    Records out;
    const DecayReport r = decay_check(hilbert_kernel(), 0, 64);
    out.push_back(CheckRecord::ge("Hilbert log-log slope, m=1..64 (lower)", 4, r.fitted_slope, -2.2));
    out.push_back(CheckRecord::le("Hilbert log-log slope, m=1..64 (upper)", 4, r.fitted_slope, -1.8));
    const Window w = Window::cube(1, 3, 0, 16);
    GridFunction a(w, 1), b(w, 1);
    for (std::int64_t c = 0; c < 8; ++c) a(c) = 1.0;
    for (std::int64_t c = 8; c < 16; ++c) b(c) = 1.0;
    const double v = pairing(b, hilbert_kernel(), a);
    out.push_back(CheckRecord::le("adjacent intervals vs 2 ln2 / pi", 4,
                                  std::abs(v - 2.0 * std::numbers::ln2 / std::numbers::pi), 1e-8));
    double worst = 0.0;
    for (std::size_t k = 0; k < r.table.translates(); ++k) {
        const Coord m = r.table.translate(k);
        if (m[0] == 0) continue;
        worst = std::max(worst, r.table.max_abs(k) / (r.fitted_constant * std::pow(1.0 + std::abs(m[0]), -2.0)));
    }
    out.push_back(CheckRecord::le("coefficients / fitted envelope C(1+|m|)^-2", 4, worst, 1.0 + 1e-12));
    return out;
}

inline Records telescoping(const ExperimentConfig& cfg) {
    const std::int64_t u = pow2(6);
    const Window window = Window::cube(1, 6, -16 * u, 36 * u), support = Window::cube(1, 6, 0, 4 * u);
    const auto st = truncation_study(hilbert_kernel(), window, support, 0, {4, 8, 16},
                                     static_cast<int>(cfg.trials_or(16)), cfg.seed);
    const auto ratios = st.ratios();
    return {CheckRecord::ge("RMS gap ratio m_max 4 -> 8", 5, ratios[0], 1.5),
            CheckRecord::ge("RMS gap ratio m_max 8 -> 16", 5, ratios[1], 1.5),
            CheckRecord::le("gap / tail bound at m_max 16 (worst instance)", 5, st.worst_gap_over_tail[2], 1.0)};
}

inline Records averaging(const ExperimentConfig& cfg) {
    const Window window = Window::cube(1, 4, -64, 160), support = Window::cube(1, 4, 0, 32);
    const ShiftParameter base = sample_beta(cfg.seed, -3, 4, 1);
    const auto enumerated = level_span(-2, 1);
    const std::vector<int> levels{0, 1};
    const BadnessParams p{3, 1, 2, 3};
    FigielOptions o;
    o.m_max = 2;
    FigielTables t(hilbert_kernel(), -3, 4, o);
    Rng rng = make_rng(cfg.seed, 21);
    const GridFunction f = random_supported_function(window, support, 1, rng);
    const GridFunction g = random_supported_function(window, support, 1, rng);
    auto gap = [&](const CubeFunctional& phi) {
        const auto r = average_good_identity(phi, window, base, enumerated, levels, p);
        return std::abs(r.lhs - r.rhs);
    };
    double a = 0.0, b = 0.0;
    for (std::int64_t m : {1, -2, 3}) {
        a = std::max(a, gap(a_summand(t, f, g, {m, 0, 0})));
        b = std::max(b, gap(b0_summand(t, f, g, {m, 0, 0})));
    }
    return {CheckRecord::le("good averaging, level indicator", 6, gap(level_indicator(1, support)), 1e-12),
            CheckRecord::le("good averaging, A summand", 6, a, 1e-12),
            CheckRecord::le("good averaging, B0 summand", 6, b, 1e-12)};
}

inline Records hilbert_norm(const ExperimentConfig& cfg) {
    const std::int64_t u = pow2(5);
    const Window window = Window::cube(1, 5, -8 * u, 18 * u), support = Window::cube(1, 5, 0, 2 * u);
    FigielOptions o;
    o.m_max = 8;
    FigielTables t(hilbert_kernel(), 0, 5, o);
    const DyadicRepresentation R1(t, DyadicSystem(window, sample_beta(mix64(cfg.seed), 0, 5, 1)));
    const DyadicRepresentation R2(t, DyadicSystem(window, sample_beta(mix64(cfg.seed + 1), 0, 5, 1)));
    const auto est = estimate_operator_norm({&R1, &R2}, support, 10, 30, cfg.seed);
    return {CheckRecord::le("dyadic representation of H, operator norm", 14, std::max(est.power, est.random_max), 1.05)};
}

namespace detail {

struct Band {
    DyadicSystem system;
    BadnessParams params{4, 1, 2};
    int from = 4, to = 11;
    explicit Band(std::uint64_t seed) : system(Window::cube(1, 12, 0, pow2(12)), sample_beta(seed, 0, 12, 1)) {}
};

inline const CompatibilityClass& largest(const Partition& part) {
    const CompatibilityClass* best = &part.classes.front();
    for (const auto& c : part.classes)
        if (c.cubes.size() > best->cubes.size()) best = &c;
    return *best;
}

}  // namespace detail

inline Records compatibility(const ExperimentConfig& cfg) {
    const detail::Band b(mix64(cfg.seed + 77));
    std::set<std::pair<int, Coord>> good;
    for (int j = b.from; j <= b.to; ++j)
        for (const auto& q : b.system.cubes(j))
            if (!b.system.is_bad(q, b.params)) good.insert({q.level, q.corner});
    double count_bad = 0, pair_failures = 0, cover_bad = 0;
    for (int m = -8; m <= 8; ++m) {
        const ShiftMap psi = ShiftMap::constant(1, {m, 0, 0});
        const Partition part = partition(b.system, psi, b.params, b.from, b.to);
        if (part.classes.size() != static_cast<std::size_t>(2 * (part.M + 1))) ++count_bad;
        std::set<std::pair<int, Coord>> seen;
        bool twice = false;
        for (const auto& c : part.classes) {
            for (const auto& q : c.cubes) twice = !seen.insert({q.level, q.corner}).second || twice;
            pair_failures += static_cast<double>(check_class_pairs(c, psi).failures);
        }
        if (twice || seen != good) ++cover_bad;
    }
    return {CheckRecord::le("shifts with class count != 2(M+1), |m| <= 8", 7, count_bad, 0.0),
            CheckRecord::le("incompatible pairs within classes", 7, pair_failures, 0.0),
            CheckRecord::le("shifts whose partition does not cover the good cubes once", 7, cover_bad, 0.0)};
}

inline Records martingale_differences(const ExperimentConfig& cfg) {
    Records out;
    double worst_a = 0.0, worst_b = 0.0;
    for (int level : {0, 1, 3, 5})
        for (std::int64_t m : {-3, 1, 2}) {
            const DyadicCube I{1, level, 6, {pow2(6 - level) * 4, 0, 0}};
            const ShiftMap psi = ShiftMap::constant(1, {m, 0, 0});
            const Window w = covering_box({I}, psi);
            const double scale = haar_magnitude(level, 1);
            const auto a = build_differences({0, 0, {I}}, 1, 1, psi, Flavor::A, w);
            worst_a = std::max({worst_a, max_abs_difference(a.function(0) + a.function(1), haar_function({I, 1}, w)) / scale,
                                max_abs_difference(a.function(0) - a.function(1), haar_function({psi(I), 1}, w)) / scale});
            const auto b = build_differences({0, 0, {I}}, 0, 1, psi, Flavor::B, w);
            GridFunction comb = b.function(0);
            comb.axpy(-2.0, b.function(1));
            worst_b = std::max({worst_b, max_abs_difference(b.function(0) + b.function(1), haar_function({I, 1}, w)) / scale,
                                max_abs_difference(comb, haar_function({psi(I), 0}, w) - haar_function({I, 0}, w)) / scale});
        }
    out.push_back(CheckRecord::le("A-type reconstruction (relative to |I|^-1/2)", 8, worst_a, 1e-15));
    out.push_back(CheckRecord::le("B-type reconstruction (relative to |I|^-1/2)", 8, worst_b, 1e-15));

    const detail::Band band(mix64(cfg.seed + 77));
    double worst_mean = 0.0, failed = 0.0, misordered_failures = 0.0;
    for (int m : {-5, 1, 3, 8}) {
        const ShiftMap psi = ShiftMap::constant(1, {m, 0, 0});
        const Partition part = partition(band.system, psi, band.params, band.from, band.to - 1);
        for (const auto& c : part.classes) {
            if (c.cubes.empty()) continue;
            const Window w = covering_box(c.cubes, psi);
            std::set<int> levels;
            for (const auto& q : c.cubes) levels.insert(q.level);
            for (Flavor fl : {Flavor::A, Flavor::B}) {
                const std::uint32_t eta = fl == Flavor::A ? 1u : 0u;
                const MdsReport r = check_mds(build_differences(c, eta, 1, psi, fl, w));
                worst_mean = std::max(worst_mean, r.worst_mean);
                if (!r.passed) ++failed;
                if (levels.size() >= 2 && !verify_mds(build_differences(c, eta, 1, psi, fl, w, false)))
                    ++misordered_failures;
            }
        }
    }
    out.push_back(CheckRecord::le("atom means of class sequences", 8, worst_mean, 1e-12));
    out.push_back(CheckRecord::le("class sequences failing verify_mds", 8, failed, 0.0));
    out.push_back(CheckRecord::ge("misordered sequences rejected", 8, misordered_failures, 1.0));
    return out;
}

inline Records transform_norms(const ExperimentConfig& cfg) {
    Records out;
    const detail::Band b(mix64(cfg.seed + 77));
    {
        const ShiftMap psi = ShiftMap::constant(1, {2, 0, 0});
        const Partition part = partition(b.system, psi, b.params, b.from, b.to - 1);
        const auto& c = detail::largest(part);
        const auto seq = build_differences(c, 1, 1, psi, Flavor::A, covering_box(c.cubes, psi));
        const auto e = estimate_transform_ratio(seq, 2.0, 1, 50, cfg.seed, MultiplierLaw::Signs);
        out.push_back(CheckRecord::le("p=2 unimodular ratio |R - 1|", 9, std::abs(e.value - 1.0), 1e-12));
    }
    const ShiftMap psi = ShiftMap::constant(1, {1, 0, 0});
    const Partition part = partition(b.system, psi, b.params, b.from, b.to - 1);
    const auto& c = detail::largest(part);
    const auto seq = build_differences(c, 0, 1, psi, Flavor::B, covering_box(c.cubes, psi));
    const int trials = static_cast<int>(cfg.trials_or(1000));
    for (double p : {4.0, 4.0 / 3.0})
        for (int d : {1, 4}) {
            const auto e = estimate_transform_ratio(seq, p, d, trials, cfg.seed + static_cast<std::uint64_t>(d));
            std::ostringstream name;
            name << "max transform ratio p=" << (p == 4.0 ? "4" : "4/3") << " d=" << d;
            out.push_back(CheckRecord::le(name.str(), 9, e.value, burkholder_constant(p) + 0.05));
        }
    return out;
}

inline Records smoothing(const ExperimentConfig& cfg) {
    Records out;
    const Window w = Window::cube(1, 6, 0, 16 * 64);
    Rng rng = make_rng(cfg.seed, 10);
    const GridFunction f = random_supported_function(w, Window::cube(1, 6, 7 * 64, 2 * 64), 1, rng);
    for (std::int64_t m : {0, 1, 5})
        out.push_back(CheckRecord::le("smoothing identity j=0 m=" + std::to_string(m), 10,
                                      smoothing_average(f, 0, {m, 0, 0}, 6).max_deviation(), 1e-10));
    return out;
}

inline Records multiplier_pipeline(const ExperimentConfig& cfg) {
    Records out;
    const ChiProfile chi = build_chi();
    const Window w = Window::cube(1, 5, 0, 4096);
    double worst = 0.0;
    for (std::int64_t k = 0; k < w.cells(); ++k) {
        const RealVec xi = impl::frequency(w, k);
        if (std::abs(xi[0]) <= 0.5) worst = std::max(worst, std::abs(chi.chi(xi, 1) * tent_hat(xi, 1) - 1.0));
    }
    out.push_back(CheckRecord::le("chi phi^ = 1 on B(0,1/2) at grid frequencies", 11, worst, 1e-12));

    const auto fam = make_bandlimited_family(w, level_span(0, 4), 1, cfg.seed);
    Rng rng = make_rng(cfg.seed, 11);
    std::uniform_real_distribution<double> y(-20.0, 20.0);
    std::vector<RealVec> ys;
    for (std::size_t k = 0; k < fam.f.size(); ++k) ys.push_back({y(rng), 0.0, 0.0});
    const auto pc = pipeline_check(fam, ys, chi);
    out.push_back(CheckRecord::le("translation = T_j (smoothing, lattice shift), relative L2", 11, pc.relative_error, 1e-6));
    out.push_back(CheckRecord::le("spectral leakage across pipeline stages", 11, pc.leakage, 1e-12));

    std::uniform_real_distribution<double> z(-0.5, 0.5);
    for (int dim : {1, 2}) {
        double lo = INFINITY, hi = 0.0;
        for (int t = 0; t < 16; ++t) {
            const double v = multiplier_variation(chi, {z(rng), z(rng), 0.0}, dim, dim == 1 ? 4000 : 400);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        out.push_back(CheckRecord::le("multiplier variation spread over 16 z, n=" + std::to_string(dim), 11, hi / lo, 2.0));
    }
    return out;
}

inline Records translation(const ExperimentConfig& cfg) {
    TranslationConfig t;
    t.seed = cfg.seed;
    t.p = 2.0;
    t.samples = 0;
    const auto l2 = translation_experiment(t);
    double dev = 0.0;
    for (double r : l2.ratio) dev = std::max(dev, std::abs(r - 1.0));
    t.p = 4.0;
    t.samples = static_cast<int>(cfg.trials_or(1000));
    const auto l4 = translation_experiment(t);
    return {CheckRecord::le("p=2 translation ratio |R(y) - 1|", 12, dev, 1e-12),
            CheckRecord::le("p=4 envelope R(y)/(1+log2 y) max/min, y in {2,8,32,128}", 12, l4.envelope_spread(), 3.0)};
}

inline Records stein(const ExperimentConfig& cfg) {
    const Window w = Window::cube(1, 6, 0, 64 * 64);
    const DyadicSystem sys(w, ShiftParameter(1, 0, 6));
    const auto fam = make_bandlimited_family(w, level_span(0, 5), 1, cfg.seed);
    const auto l4 = stein_check(fam, sys, 4.0, SignEnsemble::sampled(static_cast<int>(cfg.trials_or(1000)), cfg.seed));
    const auto l2 = stein_check(fam, sys, 2.0, SignEnsemble::exhaustive());
    return {CheckRecord::le("Stein ratio p=4", 13, l4.ratio, 3.05), CheckRecord::le("Stein ratio p=2", 13, l2.ratio, 1.0 + 1e-12)};
}

}  // namespace checks

struct CheckSpec {
    std::string suite;
    std::string name;
    int criterion = 0;
    std::function<std::vector<CheckRecord>(const ExperimentConfig&)> run;
};

inline const std::vector<CheckSpec>& check_registry() {
    static const std::vector<CheckSpec> reg{
        {"lattice", "pi_bad", 1, checks::pi_bad},
        {"lattice", "independence", 2, checks::independence},
        {"haar", "algebra", 3, checks::haar_algebra},
        {"kernel", "decay", 4, checks::decay},
        {"figiel", "telescoping", 5, checks::telescoping},
        {"figiel", "averaging", 6, checks::averaging},
        {"figiel", "hilbert_norm", 14, checks::hilbert_norm},
        {"martingale", "compatibility", 7, checks::compatibility},
        {"martingale", "differences", 8, checks::martingale_differences},
        {"martingale", "transforms", 9, checks::transform_norms},
        {"bourgain", "smoothing", 10, checks::smoothing},
        {"bourgain", "multipliers", 11, checks::multiplier_pipeline},
        {"bourgain", "translation", 12, checks::translation},
        {"bourgain", "stein", 13, checks::stein},
    };
    return reg;
}

inline std::vector<std::string> suite_names() { return {"lattice", "haar", "kernel", "figiel", "martingale", "bourgain", "all"}; }

inline std::vector<const CheckSpec*> suite_checks(const std::string& suite) {
    const auto names = suite_names();
    if (std::find(names.begin(), names.end(), suite) == names.end())
        throw ParameterError("unknown suite '" + suite + "'");
    std::vector<const CheckSpec*> out;
    for (const auto& c : check_registry())
        if (suite == "all" || c.suite == suite) out.push_back(&c);
    return out;
}

/// Runs one registered check; a failing computation becomes a failed record.
inline std::vector<CheckRecord> run_check(const CheckSpec& spec, const ExperimentConfig& cfg) {
    try {
        return spec.run(cfg);
    } catch (const std::exception& e) {
        CheckRecord r{spec.name, spec.criterion, NAN, "<=", 0.0, false, e.what()};
        return {r};
    }
}

/// Executes a suite. The config is validated before any computation.
inline Report run(const ExperimentConfig& cfg, const std::string& suite) {
    cfg.validate();
    const auto specs = suite_checks(suite);
    Report rep;
    rep.experiment = suite;
    rep.config = cfg.to_json();
    rep.seed = cfg.seed;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto* s : specs)
        for (auto& r : run_check(*s, cfg)) rep.checks.push_back(std::move(r));
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!cfg.output.empty()) {
        std::ofstream os(cfg.output);
        if (!os) throw ResourceError("cannot write report to " + cfg.output);
        os << rep.to_json().dump(2) << '\n';
    }
    return rep;
}

}  // namespace haardyad

#endif  // HAARDYAD_HARNESS_HPP
