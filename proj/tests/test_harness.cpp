#include <gtest/gtest.h>

#include "haardyad/harness.hpp"

using namespace haardyad;

TEST(Config, Validation) {
    ExperimentConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.badness().r, default_r(1, 1, 2));
    cfg.kernel = "nope";
    EXPECT_THROW(cfg.validate(), ParameterError);
    cfg = {};
    cfg.p = 1.0;
    EXPECT_THROW(cfg.validate(), ParameterError);
    cfg = {};
    cfg.gamma_num = 2;
    EXPECT_THROW(cfg.validate(), ParameterError);
    cfg = {};
    cfg.jmin = 3;
    cfg.jmax = 3;
    EXPECT_THROW(cfg.validate(), ParameterError);
}

TEST(Config, Parsers) {
    EXPECT_EQ(parse_gamma("1/2"), (std::pair{1, 2}));
    EXPECT_EQ(parse_gamma("3/4"), (std::pair{3, 4}));
    EXPECT_THROW(parse_gamma("1/1"), ParameterError);
    EXPECT_THROW(parse_gamma("0.5"), ParameterError);
    EXPECT_EQ(parse_range("-2..6"), (std::pair{-2, 6}));
    EXPECT_THROW(parse_range("0-6"), ParameterError);
}

TEST(Suites, RegistryCoversEveryCriterion) {
    std::set<int> crit;
    for (const auto& c : check_registry()) crit.insert(c.criterion);
    EXPECT_EQ(crit.size(), 14u);
    EXPECT_EQ(*crit.begin(), 1);
    EXPECT_EQ(*crit.rbegin(), 14);
    EXPECT_EQ(suite_checks("all").size(), check_registry().size());
    EXPECT_EQ(suite_checks("figiel").size(), 3u);
    EXPECT_THROW(suite_checks("nope"), ParameterError);
}

TEST(Suites, UnknownKernelFailsBeforeRunning) {
    ExperimentConfig cfg;
    cfg.kernel = "nope";
    EXPECT_THROW(run(cfg, "haar"), ParameterError);
    EXPECT_THROW(run(ExperimentConfig{}, "nope"), ParameterError);
}

TEST(Suites, HaarPassesAndIsDeterministic) {
    ExperimentConfig cfg;
    cfg.seed = 5;
    const Report a = run(cfg, "haar");
    const Report b = run(cfg, "haar");
    EXPECT_TRUE(a.pass());
    EXPECT_EQ(a.checks.size(), 3u);
    auto ja = a.to_json(), jb = b.to_json();
    ja.erase("wall_seconds");
    jb.erase("wall_seconds");
    EXPECT_EQ(ja.dump(), jb.dump());
    EXPECT_EQ(ja["config"]["seed"], 5);
    EXPECT_EQ(ja["checks"][0]["criterion"], 3);
}

TEST(Suites, FailuresBecomeRecords) {
    const CheckSpec spec{"x", "throws", 0, [](const ExperimentConfig&) -> std::vector<CheckRecord> {
                             throw ResourceError("enumeration too large");
                         }};
    const auto recs = run_check(spec, {});
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_FALSE(recs[0].pass);
    EXPECT_EQ(recs[0].error, "enumeration too large");
    EXPECT_TRUE(recs[0].to_json()["statistic"].is_null());
    Report rep;
    rep.checks = recs;
    EXPECT_FALSE(rep.pass());
    EXPECT_FALSE(Report{}.pass());
}

TEST(Suites, RecordComparators) {
    EXPECT_TRUE(CheckRecord::le("a", 1, 1.0, 1.0).pass);
    EXPECT_FALSE(CheckRecord::le("a", 1, 1.5, 1.0).pass);
    EXPECT_TRUE(CheckRecord::ge("a", 1, 2.0, 1.5).pass);
    EXPECT_FALSE(CheckRecord::le("a", 1, NAN, 1.0).pass);
}
