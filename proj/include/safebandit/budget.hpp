#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "confidence.hpp"

namespace safebandit {

/// How a pull of the baseline arm is credited to the budget.
///
/// `lcb`: frozen LCB at the pull round, like every other arm.
/// `ucb`: N_0 times the baseline's current UCB, the accounting
///        sum_i N_i L_i + N_0 U_0 - (1 - alpha) t U_0.
enum class BaselineCredit { lcb, ucb };

inline BaselineCredit parse_baseline_credit(std::string_view text) {
    if (text == "lcb") return BaselineCredit::lcb;
    if (text == "ucb") return BaselineCredit::ucb;
    throw std::invalid_argument("unknown baseline credit mode: " + std::string(text));
}

inline std::string_view to_string(BaselineCredit mode) {
    return mode == BaselineCredit::lcb ? "lcb" : "ucb";
}

/// Running pessimistic account of cumulative reward against (1 - alpha) times
/// the baseline's upper-confidence total, over the rounds since the last reset.
class BudgetLedger {
  public:
    explicit BudgetLedger(double alpha = 1.0, BaselineCredit mode = BaselineCredit::lcb)
        : alpha_(alpha), mode_(mode) {
        if (!(alpha > 0.0 && alpha <= 1.0)) {
            throw std::invalid_argument("alpha must lie in (0,1]");
        }
    }

    /// Budget if a candidate arm with confidence value `candidate` were pulled next.
    [[nodiscard]] double evaluate(double candidate, double baseline_ucb) const {
        const double rounds = static_cast<double>(rounds_ + 1);
        const double slack = 1.0 - alpha_;
        double value = history_ + candidate;
        if (mode_ == BaselineCredit::ucb && baseline_pulls_ > 0) {
            value += static_cast<double>(baseline_pulls_) * baseline_ucb;
        }
        if (slack > 0.0) {
            if (baseline_ucb == kInf) {
                return -kInf;
            }
            value -= slack * rounds * baseline_ucb;
        }
        return value;
    }

    /// Record a pull of `arm` whose LCB right after the update is `lcb`.
    void record_pull(std::size_t arm, double lcb) {
        if (arm == 0 && mode_ == BaselineCredit::ucb) {
            ++baseline_pulls_;
        } else {
            history_ += lcb;
        }
        ++rounds_;
    }

    void reset() noexcept {
        history_ = 0.0;
        rounds_ = 0;
        baseline_pulls_ = 0;
    }

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] BaselineCredit mode() const noexcept { return mode_; }
    [[nodiscard]] double lcb_history_sum() const noexcept { return history_; }
    [[nodiscard]] std::size_t rounds_since_reset() const noexcept { return rounds_; }
    [[nodiscard]] std::size_t baseline_pulls() const noexcept { return baseline_pulls_; }

  private:
    double alpha_;
    BaselineCredit mode_;
    double history_ = 0.0;
    std::size_t rounds_ = 0;
    std::size_t baseline_pulls_ = 0;
};

/// First round t (1-based) with sum_{s<=t} reward(s) < (1 - alpha) sum_{s<=t} baseline_mean(s).
///
/// `rewards` is whatever per-round collected quantity is being audited: the
/// realized rewards, or the true means of the pulled arms.
inline std::optional<std::size_t> check_constraint(std::span<const double> rewards,
                                                   std::span<const double> baseline_means, double alpha) {
    if (rewards.size() != baseline_means.size()) {
        throw std::invalid_argument("length mismatch");
    }
    const double slack = 1.0 - alpha;
    double collected = 0.0;
    double baseline = 0.0;
    for (std::size_t s = 0; s < rewards.size(); ++s) {
        collected += rewards[s];
        baseline += baseline_means[s];
        if (collected < slack * baseline) {
            return s + 1;
        }
    }
    return std::nullopt;
}

}  // namespace safebandit
