#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <safebandit/harness.hpp>
#include <safebandit/presets.hpp>

using namespace safebandit;
namespace fs = std::filesystem;

namespace {

PolicyConfig config_for(PolicyKind kind, std::size_t horizon, double alpha = 0.7) {
    PolicyConfig c;
    c.kind = kind;
    c.horizon = horizon;
    c.alpha = alpha;
    c.delta = 1.0 / static_cast<double>(horizon);
    c.gamma = 0.05;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("safebandit_harness_" + name);
    fs::remove_all(dir);
    return dir;
}

RunLog planted(PolicyKind kind, std::vector<std::pair<std::size_t, std::size_t>> detections, std::size_t horizon) {
    RunLog log;
    log.params.kind = kind;
    for (std::size_t t = 1; t <= horizon; ++t) {
        RoundRecord r;
        r.t = t;
        r.arm = 1;
        r.detection.round = t;
        for (const auto& [round, arm] : detections) {
            if (round == t) {
                r.detection.detected = true;
                r.detection.arm = arm;
                r.detection.split = 1;
            }
        }
        log.rounds.push_back(r);
    }
    return log;
}

}  // namespace

TEST(RunOne, Deterministic) {
    const auto env = builtin("global6");
    const auto c = config_for(PolicyKind::sgr, env.horizon());
    EXPECT_EQ(run_csv(run_one(env, c, 7)), run_csv(run_one(env, c, 7)));
    EXPECT_NE(run_csv(run_one(env, c, 7)), run_csv(run_one(env, c, 8)));
}

TEST(RunOne, HorizonMismatch) {
    const auto env = builtin("global6");
    EXPECT_THROW((void)run_one(env, config_for(PolicyKind::sgr, 10), 1), std::invalid_argument);
}

TEST(RunOne, RewardsComeFromTheCounterStream) {
    const auto env = builtin("local6");
    const auto log = run_one(env, config_for(PolicyKind::slr, env.horizon()), 42);
    const CounterRng rng(42);
    for (const auto& r : log.rounds) {
        ASSERT_EQ(r.reward, rng.uniform(r.t, 0) < env.mean_of(r.arm, r.t) ? 1.0 : 0.0);
    }
}

TEST(PseudoRegret, ConstantGap) {
    const EnvSpec env(1, 50, {{1, {0.4, 0.7}}});
    RunLog log;
    for (std::size_t t = 1; t <= 50; ++t) log.rounds.push_back({t, 0, Reason::baseline, 0.0, {}, {}});
    const auto r = pseudo_regret(log, env);
    for (std::size_t t = 1; t <= 50; ++t) EXPECT_NEAR(r[t - 1], 0.3 * static_cast<double>(t), 1e-12);
}

TEST(PseudoRegret, MatchesTableLookup) {
    const auto env = builtin("global6");
    const auto log = run_one(env, config_for(PolicyKind::ucbcpd, env.horizon()), 3);
    const auto r = pseudo_regret(log, env);
    double sum = 0.0;
    for (const auto& rec : log.rounds) {
        std::size_t seg = 0;
        for (std::size_t g = 0; g < env.segments().size(); ++g) {
            if (env.segments()[g].start <= rec.t) seg = g;
        }
        const auto& m = env.segments()[seg].means;
        sum += *std::max_element(m.begin(), m.end()) - m[rec.arm];
        ASSERT_NEAR(r[rec.t - 1], sum, 1e-9);
    }
    EXPECT_GE(r.back(), 0.0);
}

TEST(DetectionDelays, PlantedGlobal) {
    // changepoints at 101 and 201
    const EnvSpec env(2, 300, {{1, {0.5, 0.2, 0.8}}, {101, {0.4, 0.9, 0.1}}, {201, {0.3, 0.6, 0.4}}});
    const auto on_time = detection_delays(planted(PolicyKind::sgr, {{101, 1}, {238, 2}}, 300), env);
    ASSERT_EQ(on_time.delays.size(), 2u);
    EXPECT_EQ(on_time.delays[0], 0u);
    EXPECT_EQ(on_time.delays[1], 37u);
    EXPECT_EQ(on_time.false_alarms, 0u);

    const auto missed = detection_delays(planted(PolicyKind::sgr, {{50, 1}, {150, 1}, {160, 1}}, 300), env);
    EXPECT_EQ(missed.delays[0], 49u);
    EXPECT_FALSE(missed.delays[1]);
    // 50 precedes every change; 160 follows a restart at 150 with no new change
    EXPECT_EQ(missed.false_alarms, 2u);
}

TEST(DetectionDelays, LocalUsesOwnChangepoints) {
    // arm 1 changes at 101 only, arm 2 at 201 only
    const EnvSpec env(2, 300, {{1, {0.5, 0.2, 0.8}}, {101, {0.5, 0.9, 0.8}}, {201, {0.5, 0.9, 0.1}}});
    const auto r = detection_delays(planted(PolicyKind::slr, {{150, 2}, {260, 1}, {270, 2}}, 300), env);
    // arm 2 at 150 has no own change yet; arm 1 at 260 is late but genuine
    EXPECT_EQ(r.false_alarms, 1u);
    EXPECT_EQ(r.delays[0], 49u);
    EXPECT_EQ(r.delays[1], 59u);
}

TEST(Experiment, SingleReplicationEqualsSingleRun) {
    const auto env = builtin("global6");
    ExperimentConfig cfg;
    cfg.policies = {{"sgr", config_for(PolicyKind::sgr, env.horizon())}};
    cfg.replications = 1;
    cfg.seed = 5;
    const auto reports = run_experiment(env, cfg);
    const auto direct = pseudo_regret(run_one(env, cfg.policies[0].config, 5), env);
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(reports[0].mean_cum_regret, direct);
    EXPECT_EQ(reports[0].final_stderr(), 0.0);
}

TEST(Experiment, MeanAndStderrByHand) {
    const auto env = builtin("local6");
    ExperimentConfig cfg;
    cfg.policies = {{"slr", config_for(PolicyKind::slr, env.horizon())}};
    cfg.replications = 4;
    cfg.seed = 10;
    const auto report = run_experiment(env, cfg).front();
    std::vector<double> finals;
    for (std::uint64_t s = 10; s < 14; ++s) finals.push_back(pseudo_regret(run_one(env, cfg.policies[0].config, s), env).back());
    const double mean = (finals[0] + finals[1] + finals[2] + finals[3]) / 4.0;
    double ss = 0.0;
    for (double f : finals) ss += (f - mean) * (f - mean);
    EXPECT_NEAR(report.final_regret(), mean, 1e-9);
    EXPECT_NEAR(report.final_stderr(), std::sqrt(ss / 3.0) / 2.0, 1e-9);
    EXPECT_EQ(report.violation_rounds.size(), 4u);
    EXPECT_EQ(report.false_alarms.size(), 4u);
}

TEST(Experiment, WorkerCountDoesNotChangeBytes) {
    const auto env = builtin("global6");
    ExperimentConfig cfg;
    cfg.policies = {{"sgr", config_for(PolicyKind::sgr, env.horizon())},
                    {"cucb", config_for(PolicyKind::cucb, env.horizon())}};
    cfg.replications = 4;
    cfg.write_runs = true;
    const auto one = scratch("w1"), eight = scratch("w8");
    cfg.out_dir = one;
    cfg.workers = 1;
    run_experiment(env, cfg);
    cfg.out_dir = eight;
    cfg.workers = 8;
    run_experiment(env, cfg);
    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(one)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), one);
        EXPECT_EQ(slurp(entry.path()), slurp(eight / rel)) << rel;
        ++files;
    }
    EXPECT_EQ(files, 3u + 8u);  // summary + two per-policy files + 8 runs
    fs::remove_all(one);
    fs::remove_all(eight);
}

TEST(Experiment, ViolationFractionMatchesRounds) {
    const auto env = builtin("global6");
    ExperimentConfig cfg;
    cfg.policies = {{"ucbcpd", config_for(PolicyKind::ucbcpd, env.horizon(), 0.9)}};
    cfg.replications = 6;
    cfg.constraint = ConstraintMode::realized;
    const auto report = run_experiment(env, cfg).front();
    for (std::size_t t = 1; t <= env.horizon(); t += 97) {
        double frac = 0.0;
        for (const auto& v : report.violation_rounds) frac += v && *v <= t ? 1.0 : 0.0;
        ASSERT_NEAR(report.violation_frac_by_t[t - 1], frac / 6.0, 1e-12) << t;
    }
    std::size_t s = 0;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto log = run_one(env, cfg.policies[0].config, seed);
        EXPECT_EQ(violation_round(log, env, 0.9, ConstraintMode::realized), report.violation_rounds[s++]);
    }
}

TEST(Csv, HeadersAndLineEndings) {
    const EnvSpec env(1, 20, {{1, {0.4, 0.7}}});
    const auto log = run_one(env, config_for(PolicyKind::sgr, 20), 1);
    const auto run = run_csv(log);
    EXPECT_EQ(run.rfind("t,arm,reason,reward,budget,detected_arm,detected_split\n", 0), 0u);
    EXPECT_EQ(run.find('\r'), std::string::npos);
    EXPECT_EQ(std::count(run.begin(), run.end(), '\n'), 21);
    EXPECT_NE(run.find("\n1,0,init,"), std::string::npos);

    ExperimentConfig cfg;
    cfg.policies = {{"a", config_for(PolicyKind::sgr, 20)}};
    cfg.replications = 2;
    const auto summary = summary_csv(run_experiment(env, cfg));
    EXPECT_EQ(summary.rfind("t,algo,mean_cum_regret,stderr,violation_frac_by_t,detections_by_t\n", 0), 0u);
    EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 21);
}

TEST(Csv, Reals) {
    EXPECT_EQ(detail::csv_real(kInf), "inf");
    EXPECT_EQ(detail::csv_real(-kInf), "-inf");
    EXPECT_EQ(detail::csv_real(0.1), "0.1");
    EXPECT_EQ(std::stod(detail::csv_real(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(AlphaSweep, WritesOneRowPerPair) {
    const auto env = builtin("alpha4");
    ExperimentConfig cfg;
    cfg.policies = {{"slr", config_for(PolicyKind::slr, env.horizon())}, {"cucb", config_for(PolicyKind::cucb, env.horizon())}};
    cfg.replications = 2;
    cfg.out_dir = scratch("sweep");
    const auto rows = sweep_alpha(env, cfg, {0.2, 0.8});
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[2].alpha, 0.8);
    EXPECT_EQ(rows[3].label, "cucb");
    const auto text = slurp(cfg.out_dir / "alpha_sweep.csv");
    EXPECT_EQ(text.rfind("alpha,algo,final_mean_cum_regret,stderr,violation_frac\n", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
    fs::remove_all(cfg.out_dir);
}
