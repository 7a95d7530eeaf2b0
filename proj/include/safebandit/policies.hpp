#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "budget.hpp"
#include "confidence.hpp"
#include "detector.hpp"

namespace safebandit {

enum class PolicyKind { sgr, slr, cucb, ucbcpd, ucbcpde, ducb, umoss, glrucb_global, glrucb_local };

inline constexpr std::array<std::pair<PolicyKind, std::string_view>, 9> kPolicyTags{{
    {PolicyKind::sgr, "sgr"},
    {PolicyKind::slr, "slr"},
    {PolicyKind::cucb, "cucb"},
    {PolicyKind::ucbcpd, "ucbcpd"},
    {PolicyKind::ucbcpde, "ucbcpde"},
    {PolicyKind::ducb, "ducb"},
    {PolicyKind::umoss, "umoss"},
    {PolicyKind::glrucb_global, "glrucb-global"},
    {PolicyKind::glrucb_local, "glrucb-local"},
}};

inline PolicyKind parse_policy_kind(std::string_view tag) {
    for (const auto& [kind, name] : kPolicyTags) {
        if (name == tag) return kind;
    }
    throw std::invalid_argument("unknown algorithm tag: " + std::string(tag));
}

inline std::string_view to_string(PolicyKind kind) {
    for (const auto& [k, name] : kPolicyTags) {
        if (k == kind) return name;
    }
    return "?";
}

/// Policies that keep a budget ledger and gate exploration on it.
inline bool is_safety_aware(PolicyKind kind) {
    return kind == PolicyKind::sgr || kind == PolicyKind::slr || kind == PolicyKind::cucb;
}

enum class Reason { init, ucb, forced, baseline };

inline std::string_view to_string(Reason reason) {
    switch (reason) {
        case Reason::init: return "init";
        case Reason::ucb: return "ucb";
        case Reason::forced: return "forced";
        case Reason::baseline: return "baseline";
    }
    return "?";
}

struct Action {
    std::size_t arm = 0;
    Reason reason = Reason::init;

    friend bool operator==(const Action&, const Action&) = default;
};

struct PolicyConfig {
    PolicyKind kind = PolicyKind::sgr;
    double alpha = 0.7;
    double delta = 0.05;
    /// Forced-exploration rate (slr, ucbcpde, glrucb).
    double gamma = 0.05;
    std::size_t horizon = 1;
    double radius_constant = 2.0;

    BaselineCredit baseline_credit = BaselineCredit::ucb;
    /// Pull every arm whose history was erased once before resuming the gated rule.
    bool resample_on_restart = true;
    /// Keep the ledger across detections instead of zeroing it.
    bool carry_budget = false;
    /// Use U_{u_t} instead of L_{u_t} as the candidate term of the budget.
    bool optimistic_candidate = false;
    /// Scan every arm each round instead of only the pulled one.
    bool scan_all_arms = false;
    /// Turn the changepoint detector off (sgr/slr/ucbcpd/ucbcpde/glrucb).
    bool detector_enabled = true;

    double ducb_xi = 0.5;
    /// Discount factor; defaults to 1 - sqrt(1/T) / 4.
    std::optional<double> ducb_discount;
    /// Baseline mean assumed known by U-MOSS.
    double umoss_baseline_mean = 0.35;
    double glr_variance = 0.25;

    [[nodiscard]] ConfidenceParams confidence() const { return ConfidenceParams(delta, radius_constant); }
};

class Policy {
  public:
    explicit Policy(std::size_t k) : k_(k) {
        if (k < 1) throw std::invalid_argument("need at least one non-baseline arm");
    }
    virtual ~Policy() = default;
    Policy(const Policy&) = default;
    Policy& operator=(const Policy&) = default;

    /// Choose the arm for round t; rounds must be 1, 2, 3, ...
    virtual Action step(std::size_t t) = 0;
    /// Ingest the reward of the action chosen at round t.
    virtual DetectionOutcome update(const Action& action, double reward, std::size_t t) = 0;
    /// Budget evaluated by the last step(), for safety-aware policies.
    [[nodiscard]] virtual std::optional<double> budget_value() const { return std::nullopt; }
    [[nodiscard]] virtual PolicyKind kind() const = 0;

    [[nodiscard]] std::size_t arms() const noexcept { return k_; }
    [[nodiscard]] std::size_t round() const noexcept { return t_; }

  protected:
    void begin_round(std::size_t t) {
        if (t != t_ + 1) throw std::logic_error("rounds must advance by exactly one");
    }
    void end_round(std::size_t t) { t_ = t; }

    std::size_t k_;
    std::size_t t_ = 0;
};

/// Forced-exploration period floor(arms / gamma).
inline std::size_t forced_period(std::size_t arms, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0,1]");
    const auto period = static_cast<std::size_t>(std::floor(static_cast<double>(arms) / gamma + 1e-9));
    if (period < arms) throw std::invalid_argument("floor(K/gamma) must be at least K");
    return period;
}

/// The confidence-bound family: one budget gate, one confidence-scan
/// detector and one forced-exploration schedule, each optional.
///
///   sgr     = gate + global restarts
///   slr     = gate + local restarts + forced exploration
///   cucb    = gate only
///   ucbcpd  = global restarts
///   ucbcpde = local restarts + forced exploration
class ConfidencePolicy final : public Policy {
  public:
    struct Variant {
        bool gated = true;
        std::optional<RestartMode> restart;
        bool forced = false;
    };

    ConfidencePolicy(std::size_t k, const PolicyConfig& config, Variant variant)
        : Policy(k), config_(config), variant_(variant), params_(config.confidence()),
          ledger_(config.alpha, config.baseline_credit) {
        arms_.reserve(k + 1);
        for (std::size_t i = 0; i <= k; ++i) arms_.emplace_back(i, 1);
        if (variant_.forced) period_ = forced_period(k, config.gamma);
    }

    Action step(std::size_t t) override {
        begin_round(t);
        const std::size_t u = ucb_arm(arms_, t, params_);
        if (variant_.gated) {
            const double candidate =
                config_.optimistic_candidate ? ucb(arms_[u], t, params_) : lcb(arms_[u], t, params_);
            budget_ = ledger_.evaluate(candidate, ucb(arms_[0], t, params_));
        }
        if (const auto arm = init_arm(t)) return {*arm, Reason::init};
        // alpha = 1 makes the safety constraint vacuous, so the gate never binds.
        if (variant_.gated && config_.alpha < 1.0 && *budget_ < 0.0) return {0, Reason::baseline};
        if (variant_.forced) {
            const std::size_t slot = t % period_;
            if (slot >= 1 && slot <= k_) return {slot, Reason::forced};
        }
        return {u, Reason::ucb};
    }

    DetectionOutcome update(const Action& action, double reward, std::size_t t) override {
        auto& arm = arms_.at(action.arm);
        arm.push(reward);
        if (variant_.gated) ledger_.record_pull(action.arm, lcb(arm, t, params_));
        DetectionOutcome outcome;
        outcome.round = t;
        if (variant_.restart && config_.detector_enabled) {
            std::optional<std::size_t> scanned;
            if (!config_.scan_all_arms) scanned = action.arm;
            outcome = cpd(arms_, variant_.gated ? &ledger_ : nullptr, scanned, t, *variant_.restart, params_,
                          config_.carry_budget);
        }
        end_round(t);
        return outcome;
    }

    [[nodiscard]] std::optional<double> budget_value() const override { return budget_; }
    [[nodiscard]] PolicyKind kind() const override { return config_.kind; }

    [[nodiscard]] const std::vector<ArmState>& arm_states() const noexcept { return arms_; }
    [[nodiscard]] const BudgetLedger& ledger() const noexcept { return ledger_; }
    [[nodiscard]] const ConfidenceParams& params() const noexcept { return params_; }

  private:
    std::optional<std::size_t> init_arm(std::size_t t) const {
        if (t <= k_ + 1 && !config_.resample_on_restart) return t - 1;
        if (!config_.resample_on_restart) return std::nullopt;
        for (std::size_t i = 0; i <= k_; ++i) {
            if (arms_[i].empty()) return i;
        }
        return std::nullopt;
    }

    PolicyConfig config_;
    Variant variant_;
    ConfidenceParams params_;
    BudgetLedger ledger_;
    std::vector<ArmState> arms_;
    std::size_t period_ = 1;
    std::optional<double> budget_;
};

/// Discounted UCB over all K + 1 arms. Discounted counts follow
/// N_i(t) = g N_i(t-1) + 1{I_t = i}; the index is
/// mean_i + 2 sqrt(xi ln(sum_j N_j) / N_i).
class DiscountedUcb final : public Policy {
  public:
    DiscountedUcb(std::size_t k, const PolicyConfig& config)
        : Policy(k), xi_(config.ducb_xi),
          discount_(config.ducb_discount.value_or(default_discount(config.horizon))), counts_(k + 1, 0.0),
          sums_(k + 1, 0.0) {
        if (!(discount_ > 0.0 && discount_ <= 1.0)) throw std::invalid_argument("discount must lie in (0,1]");
    }

    static double default_discount(std::size_t horizon) {
        return 1.0 - 0.25 * std::sqrt(1.0 / static_cast<double>(horizon));
    }

    Action step(std::size_t t) override {
        begin_round(t);
        double total = 0.0;
        for (double c : counts_) total += c;
        std::size_t best = 0;
        double best_index = -kInf;
        for (std::size_t i = 0; i <= k_; ++i) {
            const double value = index(i, total);
            if (value > best_index) {
                best_index = value;
                best = i;
            }
        }
        return {best, counts_[best] == 0.0 ? Reason::init : Reason::ucb};
    }

    DetectionOutcome update(const Action& action, double reward, std::size_t t) override {
        for (std::size_t i = 0; i <= k_; ++i) {
            counts_[i] *= discount_;
            sums_[i] *= discount_;
        }
        counts_.at(action.arm) += 1.0;
        sums_[action.arm] += reward;
        end_round(t);
        return DetectionOutcome{false, std::nullopt, std::nullopt, t};
    }

    [[nodiscard]] PolicyKind kind() const override { return PolicyKind::ducb; }
    [[nodiscard]] double discount() const noexcept { return discount_; }
    [[nodiscard]] const std::vector<double>& discounted_counts() const noexcept { return counts_; }

  private:
    [[nodiscard]] double index(std::size_t arm, double total) const {
        if (counts_[arm] == 0.0) return kInf;
        const double bonus = 2.0 * std::sqrt(xi_ * std::log(std::max(total, 1.0)) / counts_[arm]);
        return sums_[arm] / counts_[arm] + bonus;
    }

    double xi_;
    double discount_;
    std::vector<double> counts_;
    std::vector<double> sums_;
};

/// Unbalanced MOSS over all K + 1 arms with per-arm regret targets
///   B_0 = TK / (sqrt(TK) + K / (alpha mu_0)),  B_i = sqrt(TK) + K / (alpha mu_0).
/// Index: mean_i + sqrt((4 / N_i) max(0, ln(T^2 / (B_i^2 N_i)))); with B_i = sqrt(TK)
/// this is the MOSS index mean_i + sqrt((4 / N_i) log+(T / (K N_i))).
class UnbalancedMoss final : public Policy {
  public:
    UnbalancedMoss(std::size_t k, const PolicyConfig& config)
        : Policy(k), horizon_(config.horizon), targets_(budgets(config.horizon, k, config.alpha,
                                                                config.umoss_baseline_mean)),
          counts_(k + 1, 0), sums_(k + 1, 0.0) {}

    /// Regret targets B_0..B_K.
    static std::vector<double> budgets(std::size_t horizon, std::size_t k, double alpha, double baseline_mean) {
        if (!(alpha > 0.0) || !(baseline_mean > 0.0)) {
            throw std::invalid_argument("U-MOSS needs alpha > 0 and a positive baseline mean");
        }
        const double tk = static_cast<double>(horizon) * static_cast<double>(k);
        const double arm_target = std::sqrt(tk) + static_cast<double>(k) / (alpha * baseline_mean);
        std::vector<double> out(k + 1, arm_target);
        out[0] = tk / arm_target;
        return out;
    }

    Action step(std::size_t t) override {
        begin_round(t);
        std::size_t best = 0;
        double best_index = -kInf;
        for (std::size_t i = 0; i <= k_; ++i) {
            const double value = index(i);
            if (value > best_index) {
                best_index = value;
                best = i;
            }
        }
        return {best, counts_[best] == 0 ? Reason::init : Reason::ucb};
    }

    DetectionOutcome update(const Action& action, double reward, std::size_t t) override {
        ++counts_.at(action.arm);
        sums_[action.arm] += reward;
        end_round(t);
        return DetectionOutcome{false, std::nullopt, std::nullopt, t};
    }

    [[nodiscard]] PolicyKind kind() const override { return PolicyKind::umoss; }
    [[nodiscard]] const std::vector<double>& targets() const noexcept { return targets_; }

    [[nodiscard]] double index(std::size_t arm) const {
        if (counts_[arm] == 0) return kInf;
        const double n = static_cast<double>(counts_[arm]);
        const double horizon = static_cast<double>(horizon_);
        const double ratio = horizon * horizon / (targets_[arm] * targets_[arm] * n);
        return sums_[arm] / n + std::sqrt(4.0 / n * std::max(0.0, std::log(ratio)));
    }

  private:
    std::size_t horizon_;
    std::vector<double> targets_;
    std::vector<std::size_t> counts_;
    std::vector<double> sums_;
};

struct GlrStatistic {
    double value = 0.0;
    std::size_t split = 0;  // argmax split, 0 when fewer than two samples
};

/// Gaussian GLR over every split s of the arm's n samples:
///   max_s [ s (m_{1:s} - m)^2 + (n - s)(m_{s+1:n} - m)^2 ] / (2 variance).
inline GlrStatistic glr_statistic(const ArmState& state, double variance) {
    GlrStatistic best;
    const std::size_t n = state.count();
    if (n < 2) return best;
    const double total = state.prefix(n);
    const double mean = total / static_cast<double>(n);
    for (std::size_t s = 1; s < n; ++s) {
        const double left_sum = state.prefix(s);
        const double left = left_sum / static_cast<double>(s) - mean;
        const double right = (total - left_sum) / static_cast<double>(n - s) - mean;
        const double value =
            (static_cast<double>(s) * left * left + static_cast<double>(n - s) * right * right) / (2.0 * variance);
        if (value > best.value) {
            best.value = value;
            best.split = s;
        }
    }
    return best;
}

/// ln(3 n^{3/2} / delta).
inline double glr_threshold(std::size_t n, double delta) {
    return std::log(3.0 * std::pow(static_cast<double>(n), 1.5) / delta);
}

/// UCB over all K + 1 arms with deterministic forced exploration
/// (slot t mod floor((K+1)/gamma) in 0..K) and Gaussian GLR restarts.
class GlrUcb final : public Policy {
  public:
    GlrUcb(std::size_t k, const PolicyConfig& config, RestartMode mode)
        : Policy(k), config_(config), mode_(mode), params_(config.confidence()),
          period_(forced_period(k + 1, config.gamma)) {
        arms_.reserve(k + 1);
        for (std::size_t i = 0; i <= k; ++i) arms_.emplace_back(i, 1);
    }

    Action step(std::size_t t) override {
        begin_round(t);
        const std::size_t slot = t % period_;
        if (slot <= k_) return {slot, arms_[slot].empty() ? Reason::init : Reason::forced};
        const std::size_t best = argmax_ucb(arms_, t, params_, 0);
        return {best, arms_[best].empty() ? Reason::init : Reason::ucb};
    }

    DetectionOutcome update(const Action& action, double reward, std::size_t t) override {
        auto& arm = arms_.at(action.arm);
        arm.push(reward);
        DetectionOutcome outcome;
        outcome.round = t;
        if (config_.detector_enabled) {
            const auto stat = glr_statistic(arm, config_.glr_variance);
            if (stat.split > 0 && stat.value >= glr_threshold(arm.count(), config_.delta)) {
                outcome.detected = true;
                outcome.arm = action.arm;
                outcome.split = stat.split;
                apply_restart(arms_, nullptr, action.arm, t, mode_, false);
            }
        }
        end_round(t);
        return outcome;
    }

    [[nodiscard]] PolicyKind kind() const override { return config_.kind; }
    [[nodiscard]] const std::vector<ArmState>& arm_states() const noexcept { return arms_; }

  private:
    PolicyConfig config_;
    RestartMode mode_;
    ConfidenceParams params_;
    std::size_t period_;
    std::vector<ArmState> arms_;
};

inline std::unique_ptr<Policy> make_policy(std::size_t k, const PolicyConfig& config) {
    using V = ConfidencePolicy::Variant;
    switch (config.kind) {
        case PolicyKind::sgr:
            return std::make_unique<ConfidencePolicy>(k, config, V{true, RestartMode::global, false});
        case PolicyKind::slr:
            return std::make_unique<ConfidencePolicy>(k, config, V{true, RestartMode::local, true});
        case PolicyKind::cucb:
            return std::make_unique<ConfidencePolicy>(k, config, V{true, std::nullopt, false});
        case PolicyKind::ucbcpd:
            return std::make_unique<ConfidencePolicy>(k, config, V{false, RestartMode::global, false});
        case PolicyKind::ucbcpde:
            return std::make_unique<ConfidencePolicy>(k, config, V{false, RestartMode::local, true});
        case PolicyKind::ducb:
            return std::make_unique<DiscountedUcb>(k, config);
        case PolicyKind::umoss:
            return std::make_unique<UnbalancedMoss>(k, config);
        case PolicyKind::glrucb_global:
            return std::make_unique<GlrUcb>(k, config, RestartMode::global);
        case PolicyKind::glrucb_local:
            return std::make_unique<GlrUcb>(k, config, RestartMode::local);
    }
    throw std::invalid_argument("unknown policy kind");
}

}  // namespace safebandit
