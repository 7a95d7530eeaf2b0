// safebandit: run replicated experiments, alpha sweeps, theory calculators
// and environment checks from the command line.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <safebandit/safebandit.hpp>

namespace sb = safebandit;

namespace {

struct CommonOptions {
    std::string env = "global6";
    std::vector<std::string> algos{"sgr"};
    double alpha = 0.7;
    std::optional<double> delta;  // default 1/T
    std::optional<double> gamma;  // default sqrt(ln T / T)
    std::size_t reps = 20;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    std::string out;
    bool write_runs = false;
    std::string baseline_credit = "ucb";
    std::string constraint = "expected";
    bool resample_on_restart = true;
    bool carry_budget = false;
    bool optimistic_candidate = false;
    bool scan_all_arms = false;
    bool no_detector = false;
    std::optional<double> umoss_mu0;
};

double default_delta(std::size_t horizon) { return 1.0 / static_cast<double>(horizon); }
double default_gamma(std::size_t horizon) {
    const double t = static_cast<double>(horizon);
    return std::min(1.0, std::sqrt(std::log(t) / t));
}

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--env", o.env, "preset name (global6, local6, alpha4) or environment file")->capture_default_str();
    cmd->add_option("--algo", o.algos, "policy tag(s): sgr slr cucb ucbcpd ucbcpde ducb umoss glrucb-global glrucb-local")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--delta", o.delta, "confidence parameter (default 1/T)");
    cmd->add_option("--gamma", o.gamma, "forced-exploration rate (default sqrt(ln T / T))");
    cmd->add_option("--reps", o.reps, "replications")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "first replication seed")->capture_default_str();
    cmd->add_option("--workers", o.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "output directory")->required();
    cmd->add_flag("--write-runs", o.write_runs, "also write one per-round CSV per replication");
    cmd->add_option("--baseline-credit", o.baseline_credit, "budget credit of baseline pulls: ucb | lcb")
        ->capture_default_str();
    cmd->add_option("--constraint", o.constraint, "audited quantity: expected | realized")->capture_default_str();
    cmd->add_option("--resample-on-restart", o.resample_on_restart, "re-pull erased arms before gating (true|false)")
        ->capture_default_str();
    cmd->add_flag("--carry-budget", o.carry_budget, "keep the budget across detections");
    cmd->add_flag("--optimistic-candidate", o.optimistic_candidate, "use U instead of L for the candidate term");
    cmd->add_flag("--scan-all-arms", o.scan_all_arms, "scan every arm each round, not only the pulled one");
    cmd->add_flag("--no-detector", o.no_detector, "disable changepoint detection");
    cmd->add_option("--umoss-mu0", o.umoss_mu0, "baseline mean known to umoss (default: smallest baseline mean)");
}

sb::ExperimentConfig make_experiment(const sb::EnvSpec& env, const CommonOptions& o, double alpha) {
    sb::ExperimentConfig config;
    config.env_id = o.env;
    config.replications = o.reps;
    config.seed = o.seed;
    config.workers = o.workers;
    config.out_dir = o.out;
    config.write_runs = o.write_runs;
    config.constraint = sb::parse_constraint_mode(o.constraint);
    for (const auto& tag : o.algos) {
        sb::PolicyConfig p;
        p.kind = sb::parse_policy_kind(tag);
        p.alpha = alpha;
        p.horizon = env.horizon();
        p.delta = o.delta.value_or(default_delta(env.horizon()));
        p.gamma = o.gamma.value_or(default_gamma(env.horizon()));
        p.baseline_credit = sb::parse_baseline_credit(o.baseline_credit);
        p.resample_on_restart = o.resample_on_restart;
        p.carry_budget = o.carry_budget;
        p.optimistic_candidate = o.optimistic_candidate;
        p.scan_all_arms = o.scan_all_arms;
        p.detector_enabled = !o.no_detector;
        p.umoss_baseline_mean = o.umoss_mu0.value_or(env.gap_profile().min_baseline_mean());
        for (const auto& existing : config.policies) {
            if (existing.label == tag) throw std::invalid_argument("duplicate algorithm: " + tag);
        }
        config.policies.push_back({tag, p});
    }
    return config;
}

std::string means_csv(const sb::EnvSpec& env) {
    std::string out = "t,arm,mean\n";
    for (std::size_t t = 1; t <= env.horizon(); ++t) {
        for (std::size_t i = 0; i <= env.arms(); ++i) {
            out += std::to_string(t) + ',' + std::to_string(i) + ',' + sb::detail::format_real(env.mean_of(i, t)) + '\n';
        }
    }
    return out;
}

int cmd_run(const CommonOptions& o) {
    const auto env = sb::load_env(o.env);
    const auto config = make_experiment(env, o, o.alpha);
    const auto reports = sb::run_experiment(env, config);
    sb::detail::write_file(std::filesystem::path(o.out) / "means.csv", means_csv(env));
    std::printf("%-14s %14s %10s %12s %12s\n", "algo", "final_regret", "stderr", "violations", "detections");
    for (const auto& r : reports) {
        std::size_t violations = 0;
        for (const auto& v : r.violation_rounds) violations += v ? 1 : 0;
        std::printf("%-14s %14.3f %10.3f %8zu/%-3zu %12.2f\n", r.label.c_str(), r.final_regret(), r.final_stderr(),
                    violations, r.replications, r.detections_by_t.back());
    }
    return 0;
}

int cmd_sweep(const CommonOptions& o, const std::vector<double>& alphas) {
    const auto env = sb::load_env(o.env);
    for (double a : alphas) {
        if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
    }
    const auto rows = sb::sweep_alpha(env, make_experiment(env, o, alphas.front()), alphas);
    std::printf("%-8s %-14s %14s %10s %10s\n", "alpha", "algo", "final_regret", "stderr", "viol_frac");
    for (const auto& row : rows) {
        std::printf("%-8g %-14s %14.3f %10.3f %10.3f\n", row.alpha, row.label.c_str(), row.final_regret,
                    row.final_stderr, row.violation_fraction);
    }
    return 0;
}

std::string show(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream s;
    s.precision(8);
    s << v;
    return s.str();
}

int cmd_theory(const std::string& env_name, double alpha, std::optional<double> delta_opt,
               std::optional<double> gamma_opt) {
    namespace th = sb::theory;
    const auto env = sb::load_env(env_name);
    const double delta = delta_opt.value_or(default_delta(env.horizon()));
    const double gamma = gamma_opt.value_or(default_gamma(env.horizon()));
    const auto in = th::make_inputs(env, delta, alpha, gamma);
    const std::size_t k = in.arms();
    std::cout << "env " << env_name << ": K=" << k << " T=" << env.horizon() << " G=" << in.changepoints()
              << "  alpha=" << alpha << " delta=" << show(delta) << " gamma=" << show(gamma) << "\n";
    std::cout << "B(T,delta) = " << show(th::b_constant(env.horizon(), delta)) << "\n\n";

    std::cout << "segment  start  mu0     N_bse        max_opt\n";
    for (std::size_t g = 0; g <= in.changepoints(); ++g) {
        std::printf("%-8zu %-6zu %-7.4g %-12s %s\n", g, env.segments()[g].start, in.gaps.baseline_means[g],
                    show(th::n_baseline(in, g)).c_str(), show(in.gaps.max_optimality[g]).c_str());
    }

    std::cout << "\nboundary  round  d_global(product)  d_global(split)\n";
    for (std::size_t g = 1; g <= in.changepoints(); ++g) {
        auto delay = [&](th::DelayForm form) {
            try {
                return show(th::delay_global(in, g, form));
            } catch (const std::invalid_argument&) {
                return std::string("undefined (an arm does not change)");
            }
        };
        std::printf("%-9zu %-6zu %-18s %s\n", g, env.segments()[g].start, delay(th::DelayForm::product).c_str(),
                    delay(th::DelayForm::split).c_str());
    }

    std::cout << "\nboundary  arm  chg        d_local      H1           H2           H2bar        H3\n";
    for (std::size_t g = 1; g <= in.changepoints(); ++g) {
        for (std::size_t i = 0; i <= k; ++i) {
            const double jump = in.gaps.chg(g, i);
            const std::string d = jump > 0.0 ? show(th::delay_local(in, i, g)) : "-";
            const auto h = th::hardness(in, i, g);
            std::printf("%-9zu %-4zu %-10.4g %-12s %-12s %-12s %-12s %s\n", g, i, jump, d.c_str(), show(h.h1).c_str(),
                        show(h.h2).c_str(), show(h.h2bar).c_str(), i == 0 ? "-" : show(h.h3).c_str());
        }
    }

    std::cout << "\norder-only bounds (O-constants set to 1)\n";
    std::cout << "  gap-dependent, global restart: " << show(th::bound_sgr(in)) << "\n";
    std::cout << "  gap-dependent, local restart:  " << show(th::bound_slr(in)) << "\n";
    std::cout << "  gap-independent, global:       " << show(th::bound_gap_independent(in, th::BoundKind::global))
              << "\n";
    std::cout << "  gap-independent, local:        " << show(th::bound_gap_independent(in, th::BoundKind::local))
              << "\n";
    return 0;
}

int cmd_validate(const std::string& env_name, double alpha, std::optional<double> delta_opt,
                 std::optional<double> gamma_opt) {
    const auto env = sb::load_env(env_name);
    const double delta = delta_opt.value_or(default_delta(env.horizon()));
    const double gamma = gamma_opt.value_or(default_gamma(env.horizon()));
    std::cout << "env " << env_name << ": valid, K=" << env.arms() << " T=" << env.horizon()
              << " segments=" << env.segments().size() << "\n";
    for (const auto& note : env.notes()) std::cout << "  # " << note << "\n";
    for (auto mode : {sb::RestartMode::global, sb::RestartMode::local}) {
        const auto report = sb::validate_separation(env, delta, alpha, gamma, mode);
        std::cout << "separation (" << sb::to_string(mode) << "): "
                  << (report.all_satisfied() ? "satisfied" : "NOT satisfied (advisory)") << "\n";
        for (const auto& c : report.checks) {
            std::cout << "  ";
            if (c.arm) std::cout << "arm " << *c.arm << " ";
            std::cout << c.from_round << " -> " << c.to_round << ": gap " << (c.to_round - c.from_round)
                      << ", required " << (c.degenerate ? std::string("undefined") : show(c.required))
                      << (c.satisfied ? "  ok" : "  fails") << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Safe piecewise-stationary bandit simulations"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    auto* run = app.add_subcommand("run", "replicated experiment; writes summary.csv, <algo>.csv, means.csv");
    add_common(run, run_opts);
    run->add_option("--alpha", run_opts.alpha, "risk parameter in (0,1]")->capture_default_str();

    CommonOptions sweep_opts;
    std::vector<double> alphas{0.1, 0.3, 0.5, 0.7, 0.9};
    auto* sweep = app.add_subcommand("sweep-alpha", "final regret versus alpha; writes alpha_sweep.csv");
    add_common(sweep, sweep_opts);
    sweep->add_option("--alphas", alphas, "comma-separated risk levels")->delimiter(',')->capture_default_str();

    std::string theory_env = "global6";
    double theory_alpha = 0.7;
    std::optional<double> theory_delta, theory_gamma;
    auto* theory = app.add_subcommand("theory", "print detection delays, hardness terms and bounds");
    theory->add_option("--env", theory_env, "preset name or environment file")->capture_default_str();
    theory->add_option("--alpha", theory_alpha, "risk parameter")->capture_default_str();
    theory->add_option("--delta", theory_delta, "confidence parameter (default 1/T)");
    theory->add_option("--gamma", theory_gamma, "forced-exploration rate (default sqrt(ln T / T))");

    std::string validate_env = "global6";
    double validate_alpha = 0.7;
    std::optional<double> validate_delta, validate_gamma;
    auto* validate = app.add_subcommand("validate", "parse an environment and check changepoint separation");
    validate->add_option("--env", validate_env, "preset name or environment file")->capture_default_str();
    validate->add_option("--alpha", validate_alpha, "risk parameter")->capture_default_str();
    validate->add_option("--delta", validate_delta, "confidence parameter (default 1/T)");
    validate->add_option("--gamma", validate_gamma, "forced-exploration rate (default sqrt(ln T / T))");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_opts);
        if (sweep->parsed()) return cmd_sweep(sweep_opts, alphas);
        if (theory->parsed()) return cmd_theory(theory_env, theory_alpha, theory_delta, theory_gamma);
        if (validate->parsed()) return cmd_validate(validate_env, validate_alpha, validate_delta, validate_gamma);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
