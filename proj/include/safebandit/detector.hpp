#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "budget.hpp"
#include "confidence.hpp"

namespace safebandit {

struct DetectionOutcome {
    bool detected = false;
    std::optional<std::size_t> arm;
    /// Last sample index of the left slice, 1 <= split < count of the flagged arm.
    std::optional<std::size_t> split;
    std::size_t round = 0;
};

enum class RestartMode { global, local };

inline RestartMode parse_restart_mode(std::string_view text) {
    if (text == "global") return RestartMode::global;
    if (text == "local") return RestartMode::local;
    throw std::invalid_argument("unknown restart mode: " + std::string(text));
}

inline std::string_view to_string(RestartMode mode) { return mode == RestartMode::global ? "global" : "local"; }

/// Confidence-scan test over every split of the arm's post-restart samples.
///
/// Fires at the smallest split s with
///   |mean(1..s) - mean(s+1..n)| > beta(s, t) + beta(n - s, t).
inline DetectionOutcome scan_arm(const ArmState& state, std::size_t t, const ConfidenceParams& params) {
    DetectionOutcome outcome;
    outcome.round = t;
    const std::size_t n = state.count();
    if (n < 2) {
        return outcome;
    }
    const double scale = radius_scale(t, params);
    const double total = state.prefix(n);
    for (std::size_t s = 1; s < n; ++s) {
        const double left_sum = state.prefix(s);
        const double left = left_sum / static_cast<double>(s);
        const double right = (total - left_sum) / static_cast<double>(n - s);
        const double width =
            scale / std::sqrt(static_cast<double>(s)) + scale / std::sqrt(static_cast<double>(n - s));
        if (std::abs(left - right) > width) {
            outcome.detected = true;
            outcome.arm = state.arm_id();
            outcome.split = s;
            return outcome;
        }
    }
    return outcome;
}

/// Erase history after a detection on `flagged` at round t.
inline void apply_restart(std::vector<ArmState>& arms, BudgetLedger* ledger, std::size_t flagged, std::size_t t,
                          RestartMode mode, bool carry_budget) {
    if (mode == RestartMode::global) {
        for (auto& arm : arms) {
            arm.restart(t);
        }
    } else {
        arms.at(flagged).restart(t);
    }
    if (ledger != nullptr && !carry_budget) {
        ledger->reset();
    }
}

/// One changepoint-detection pass after the reward update of round t.
///
/// Scans only `pulled` when given (an arm that was not pulled has the same
/// samples as at its last scan, so it cannot newly fire), otherwise every arm
/// in index order. On detection the flagged arm (local) or all arms (global)
/// restart at t and the ledger is zeroed unless `carry_budget`.
inline DetectionOutcome cpd(std::vector<ArmState>& arms, BudgetLedger* ledger, std::optional<std::size_t> pulled,
                            std::size_t t, RestartMode mode, const ConfidenceParams& params,
                            bool carry_budget = false) {
    DetectionOutcome outcome;
    outcome.round = t;
    if (pulled) {
        outcome = scan_arm(arms.at(*pulled), t, params);
    } else {
        for (const auto& arm : arms) {
            outcome = scan_arm(arm, t, params);
            if (outcome.detected) {
                break;
            }
        }
    }
    if (outcome.detected) {
        apply_restart(arms, ledger, *outcome.arm, t, mode, carry_budget);
    }
    return outcome;
}

}  // namespace safebandit
