#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "budget.hpp"
#include "detector.hpp"
#include "environment.hpp"
#include "policies.hpp"
#include "rng.hpp"

namespace safebandit {

struct RoundRecord {
    std::size_t t = 0;
    std::size_t arm = 0;
    Reason reason = Reason::init;
    double reward = 0.0;
    /// Budget evaluated at decision time; present iff the policy is safety-aware.
    std::optional<double> budget;
    DetectionOutcome detection;
};

struct RunLog {
    std::string env_id;
    std::string policy;
    std::uint64_t seed = 0;
    PolicyConfig params;
    std::vector<RoundRecord> rounds;
};

/// T rounds of step, sample, update. Deterministic in (env, config, seed).
inline RunLog run_one(const EnvSpec& env, const PolicyConfig& config, std::uint64_t seed,
                      const std::string& env_id = {}) {
    if (config.horizon != env.horizon()) throw std::invalid_argument("policy horizon differs from environment horizon");
    auto policy = make_policy(env.arms(), config);
    const CounterRng rng(seed);
    RunLog log{env_id, std::string(to_string(config.kind)), seed, config, {}};
    log.rounds.reserve(env.horizon());
    for (std::size_t t = 1; t <= env.horizon(); ++t) {
        const Action action = policy->step(t);
        if (action.arm > env.arms()) throw std::logic_error("policy chose an arm outside the environment");
        RoundRecord record;
        record.t = t;
        record.arm = action.arm;
        record.reason = action.reason;
        record.budget = policy->budget_value();
        record.reward = env.sample(action.arm, t, rng);
        record.detection = policy->update(action, record.reward, t);
        log.rounds.push_back(record);
    }
    return log;
}

/// Cumulative sum over s <= t of max_i mu_i(s) - mu_{I_s}(s), arms 0..K in the max.
inline std::vector<double> pseudo_regret(const RunLog& log, const EnvSpec& env) {
    std::vector<double> out;
    out.reserve(log.rounds.size());
    double total = 0.0;
    for (const auto& r : log.rounds) {
        total += env.best_mean(r.t) - env.mean_of(r.arm, r.t);
        out.push_back(total);
    }
    return out;
}

inline std::vector<double> baseline_means(const EnvSpec& env) {
    std::vector<double> out;
    out.reserve(env.horizon());
    for (std::size_t t = 1; t <= env.horizon(); ++t) out.push_back(env.mean_of(0, t));
    return out;
}

/// Which collected quantity is audited against (1 - alpha) times the baseline means.
enum class ConstraintMode {
    /// True means of the pulled arms.
    expected,
    /// Realized rewards.
    realized,
};

inline ConstraintMode parse_constraint_mode(std::string_view text) {
    if (text == "expected") return ConstraintMode::expected;
    if (text == "realized") return ConstraintMode::realized;
    throw std::invalid_argument("unknown constraint mode: " + std::string(text));
}

inline std::vector<double> collected(const RunLog& log, const EnvSpec& env, ConstraintMode mode) {
    std::vector<double> out;
    out.reserve(log.rounds.size());
    for (const auto& r : log.rounds) {
        out.push_back(mode == ConstraintMode::realized ? r.reward : env.mean_of(r.arm, r.t));
    }
    return out;
}

inline std::optional<std::size_t> violation_round(const RunLog& log, const EnvSpec& env, double alpha,
                                                  ConstraintMode mode = ConstraintMode::expected) {
    const auto values = collected(log, env, mode);
    const auto baseline = baseline_means(env);
    return check_constraint(values, std::span<const double>(baseline).first(values.size()), alpha);
}

/// Restart semantics of a policy kind; nullopt for policies that never restart.
inline std::optional<RestartMode> restart_mode_of(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::sgr:
        case PolicyKind::ucbcpd:
        case PolicyKind::glrucb_global:
            return RestartMode::global;
        case PolicyKind::slr:
        case PolicyKind::ucbcpde:
        case PolicyKind::glrucb_local:
            return RestartMode::local;
        default:
            return std::nullopt;
    }
}

struct DetectionReport {
    /// Per true changepoint t_c: first detection round in [t_c, next t_c) minus t_c, or nullopt (missed).
    std::vector<std::optional<std::size_t>> delays;
    /// Detections with no true change inside the restarted window.
    std::size_t false_alarms = 0;
};

/// A detection is genuine when some changepoint falls inside the post-restart
/// window it was computed on: any changepoint for global restarts, one of the
/// flagged arm's own changepoints for local restarts. Everything else,
/// including every detection before the first changepoint, is a false alarm.
inline DetectionReport detection_delays(const RunLog& log, const EnvSpec& env) {
    const auto starts = env.changepoints();
    const auto mode = restart_mode_of(log.params.kind).value_or(RestartMode::global);
    DetectionReport report;
    report.delays.assign(starts.size(), std::nullopt);
    std::vector<std::size_t> restarted(env.arms() + 1, 0);
    for (const auto& r : log.rounds) {
        if (!r.detection.detected) continue;
        const std::size_t segment = env.segment_index(r.t);
        if (segment > 0 && !report.delays[segment - 1]) report.delays[segment - 1] = r.t - starts[segment - 1];
        const std::size_t arm = *r.detection.arm;
        const auto own = mode == RestartMode::global ? starts : env.changepoints_of(arm);
        const bool genuine = std::any_of(own.begin(), own.end(),
                                         [&](std::size_t c) { return c > restarted[arm] && c <= r.t; });
        if (!genuine) ++report.false_alarms;
        if (mode == RestartMode::global) {
            std::fill(restarted.begin(), restarted.end(), r.t);
        } else {
            restarted[arm] = r.t;
        }
    }
    return report;
}

// CSV output. LF line endings, header row first, reals in shortest round-trip form.

namespace detail {

inline std::string csv_real(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    return format_real(value);
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace detail

inline constexpr std::string_view kRunCsvHeader = "t,arm,reason,reward,budget,detected_arm,detected_split\n";
inline constexpr std::string_view kSummaryCsvHeader =
    "t,algo,mean_cum_regret,stderr,violation_frac_by_t,detections_by_t\n";

inline std::string run_csv(const RunLog& log) {
    std::string out(kRunCsvHeader);
    for (const auto& r : log.rounds) {
        out += std::to_string(r.t);
        out += ',';
        out += std::to_string(r.arm);
        out += ',';
        out += to_string(r.reason);
        out += ',';
        out += detail::csv_real(r.reward);
        out += ',';
        if (r.budget) out += detail::csv_real(*r.budget);
        out += ',';
        if (r.detection.detected) out += std::to_string(*r.detection.arm);
        out += ',';
        if (r.detection.detected) out += std::to_string(*r.detection.split);
        out += '\n';
    }
    return out;
}

struct PolicyEntry {
    std::string label;
    PolicyConfig config;
};

/// Per-round aggregates of one policy over R replications.
struct RegretReport {
    std::string label;
    std::size_t replications = 0;
    std::vector<double> mean_cum_regret;
    std::vector<double> stderr_cum_regret;
    std::vector<double> violation_frac_by_t;
    std::vector<double> detections_by_t;
    std::vector<std::optional<std::size_t>> violation_rounds;   // per replication, seed order
    std::vector<std::vector<std::optional<std::size_t>>> delays;  // [boundary][replication]
    std::vector<std::size_t> false_alarms;                        // per replication

    [[nodiscard]] double final_regret() const { return mean_cum_regret.back(); }
    [[nodiscard]] double final_stderr() const { return stderr_cum_regret.back(); }
    [[nodiscard]] double violation_fraction() const { return violation_frac_by_t.back(); }
};

struct ExperimentConfig {
    std::string env_id;
    std::vector<PolicyEntry> policies;
    std::size_t replications = 20;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    ConstraintMode constraint = ConstraintMode::expected;
    /// Directory for CSV files; nothing is written when empty.
    std::filesystem::path out_dir;
    /// Also write one per-round CSV per (policy, replication) under out_dir/runs.
    bool write_runs = false;
};

namespace detail {

struct Replication {
    std::vector<double> cum_regret;
    std::vector<std::uint32_t> cum_detections;
    std::optional<std::size_t> violation;
    DetectionReport detections;
};

/// Run `jobs` closures on up to `workers` threads; job i is executed exactly once.
template <typename Job>
void parallel_for(std::size_t jobs, std::size_t workers, Job&& job) {
    workers = std::max<std::size_t>(1, std::min(workers, jobs));
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < jobs; i = next++) job(i);
            } catch (...) {
                errors[w] = std::current_exception();
                next = jobs;
            }
        });
    }
    for (auto& thread : pool) thread.join();
    for (auto& error : errors) {
        if (error) std::rethrow_exception(error);
    }
}

}  // namespace detail

inline std::string summary_csv(const std::vector<RegretReport>& reports) {
    std::string out(kSummaryCsvHeader);
    for (const auto& report : reports) {
        for (std::size_t i = 0; i < report.mean_cum_regret.size(); ++i) {
            out += std::to_string(i + 1);
            out += ',';
            out += report.label;
            out += ',';
            out += detail::csv_real(report.mean_cum_regret[i]);
            out += ',';
            out += detail::csv_real(report.stderr_cum_regret[i]);
            out += ',';
            out += detail::csv_real(report.violation_frac_by_t[i]);
            out += ',';
            out += detail::csv_real(report.detections_by_t[i]);
            out += '\n';
        }
    }
    return out;
}

/// R replications per policy with seeds seed..seed+R-1. Results are merged in
/// seed order, so the output does not depend on the worker count.
inline std::vector<RegretReport> run_experiment(const EnvSpec& env, const ExperimentConfig& config) {
    if (config.replications < 1) throw std::invalid_argument("need at least one replication");
    const std::size_t reps = config.replications;
    const std::size_t horizon = env.horizon();
    const std::size_t jobs = config.policies.size() * reps;
    std::vector<detail::Replication> results(jobs);

    if (!config.out_dir.empty()) {
        std::filesystem::create_directories(config.out_dir);
        if (config.write_runs) std::filesystem::create_directories(config.out_dir / "runs");
    }

    detail::parallel_for(jobs, config.workers, [&](std::size_t job) {
        const auto& entry = config.policies[job / reps];
        const std::uint64_t seed = config.seed + job % reps;
        const RunLog log = run_one(env, entry.config, seed, config.env_id);
        auto& out = results[job];
        out.cum_regret = pseudo_regret(log, env);
        out.cum_detections.reserve(horizon);
        std::uint32_t detections = 0;
        for (const auto& r : log.rounds) {
            detections += r.detection.detected ? 1 : 0;
            out.cum_detections.push_back(detections);
        }
        out.violation = violation_round(log, env, entry.config.alpha, config.constraint);
        out.detections = detection_delays(log, env);
        if (!config.out_dir.empty() && config.write_runs) {
            const auto name = entry.label + "_seed" + std::to_string(seed) + ".csv";
            detail::write_file(config.out_dir / "runs" / name, run_csv(log));
        }
    });

    std::vector<RegretReport> reports;
    for (std::size_t p = 0; p < config.policies.size(); ++p) {
        RegretReport report;
        report.label = config.policies[p].label;
        report.replications = reps;
        report.mean_cum_regret.assign(horizon, 0.0);
        report.stderr_cum_regret.assign(horizon, 0.0);
        report.violation_frac_by_t.assign(horizon, 0.0);
        report.detections_by_t.assign(horizon, 0.0);
        report.delays.assign(env.changepoint_count(), {});
        const double r = static_cast<double>(reps);
        for (std::size_t k = 0; k < reps; ++k) {
            const auto& rep = results[p * reps + k];
            for (std::size_t i = 0; i < horizon; ++i) {
                report.mean_cum_regret[i] += rep.cum_regret[i];
                report.detections_by_t[i] += rep.cum_detections[i];
            }
            if (rep.violation) {
                for (std::size_t i = *rep.violation - 1; i < horizon; ++i) report.violation_frac_by_t[i] += 1.0;
            }
            report.violation_rounds.push_back(rep.violation);
            for (std::size_t b = 0; b < report.delays.size(); ++b) report.delays[b].push_back(rep.detections.delays[b]);
            report.false_alarms.push_back(rep.detections.false_alarms);
        }
        for (std::size_t i = 0; i < horizon; ++i) {
            report.mean_cum_regret[i] /= r;
            report.detections_by_t[i] /= r;
            report.violation_frac_by_t[i] /= r;
        }
        if (reps > 1) {
            for (std::size_t i = 0; i < horizon; ++i) {
                double squares = 0.0;
                for (std::size_t k = 0; k < reps; ++k) {
                    const double d = results[p * reps + k].cum_regret[i] - report.mean_cum_regret[i];
                    squares += d * d;
                }
                report.stderr_cum_regret[i] = std::sqrt(squares / (r - 1.0)) / std::sqrt(r);
            }
        }
        reports.push_back(std::move(report));
    }

    if (!config.out_dir.empty()) {
        detail::write_file(config.out_dir / "summary.csv", summary_csv(reports));
        for (const auto& report : reports) {
            detail::write_file(config.out_dir / (report.label + ".csv"), summary_csv({report}));
        }
    }
    return reports;
}

struct AlphaSweepRow {
    double alpha = 0.0;
    std::string label;
    double final_regret = 0.0;
    double final_stderr = 0.0;
    double violation_fraction = 0.0;
};

inline constexpr std::string_view kAlphaSweepCsvHeader = "alpha,algo,final_mean_cum_regret,stderr,violation_frac\n";

/// Final regret of every policy at every risk level; each alpha reuses the same seeds.
inline std::vector<AlphaSweepRow> sweep_alpha(const EnvSpec& env, const ExperimentConfig& base,
                                              const std::vector<double>& alphas) {
    std::vector<AlphaSweepRow> rows;
    for (double alpha : alphas) {
        ExperimentConfig config = base;
        config.out_dir.clear();
        for (auto& entry : config.policies) entry.config.alpha = alpha;
        for (const auto& report : run_experiment(env, config)) {
            rows.push_back({alpha, report.label, report.final_regret(), report.final_stderr(),
                            report.violation_fraction()});
        }
    }
    if (!base.out_dir.empty()) {
        std::filesystem::create_directories(base.out_dir);
        std::string out(kAlphaSweepCsvHeader);
        for (const auto& row : rows) {
            out += detail::csv_real(row.alpha) + ',' + row.label + ',' + detail::csv_real(row.final_regret) + ',' +
                   detail::csv_real(row.final_stderr) + ',' + detail::csv_real(row.violation_fraction) + '\n';
        }
        detail::write_file(base.out_dir / "alpha_sweep.csv", out);
    }
    return rows;
}

}  // namespace safebandit
