#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "detector.hpp"
#include "environment.hpp"
#include "theory.hpp"

namespace safebandit {

/// One consecutive pair of changepoints checked against twice the larger detection delay.
struct SeparationCheck {
    std::optional<std::size_t> arm;  // set in local mode
    std::size_t from_round = 1;      // t_{c_g}, 1 for the initial segment
    std::size_t to_round = 1;        // t_{c_{g+1}}
    double required = 0.0;           // 2 max{d_g, d_{g+1}}; +inf when a delay is undefined
    bool degenerate = false;         // a delay could not be evaluated (zero jump)
    bool satisfied = false;
};

struct SeparationReport {
    RestartMode mode = RestartMode::global;
    std::vector<SeparationCheck> checks;

    [[nodiscard]] bool all_satisfied() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.satisfied; });
    }
};

/// Advisory check of the changepoint-separation conditions; delay at the initial round is 0.
inline SeparationReport validate_separation(const EnvSpec& env, double delta, double alpha, double gamma,
                                            RestartMode mode) {
    const auto inputs = theory::make_inputs(env, delta, alpha, gamma);
    SeparationReport report;
    report.mode = mode;
    const auto starts = env.changepoints();

    auto push = [&](std::optional<std::size_t> arm, std::size_t from, std::size_t to, std::optional<double> d_from,
                    std::optional<double> d_to) {
        SeparationCheck check;
        check.arm = arm;
        check.from_round = from;
        check.to_round = to;
        check.degenerate = !d_from || !d_to;
        check.required = check.degenerate ? kInf : 2.0 * std::max(*d_from, *d_to);
        check.satisfied = !check.degenerate && static_cast<double>(to - from) >= check.required;
        report.checks.push_back(check);
    };

    if (mode == RestartMode::global) {
        std::vector<std::optional<double>> delays{0.0};
        for (std::size_t g = 1; g <= starts.size(); ++g) {
            try {
                delays.emplace_back(theory::delay_global(inputs, g));
            } catch (const std::invalid_argument&) {
                delays.emplace_back(std::nullopt);
            }
        }
        for (std::size_t g = 0; g < starts.size(); ++g) {
            const std::size_t from = g == 0 ? 1 : starts[g - 1];
            push(std::nullopt, from, starts[g], delays[g], delays[g + 1]);
        }
        return report;
    }

    for (std::size_t arm = 0; arm <= env.arms(); ++arm) {
        std::vector<std::size_t> rounds{1};
        std::vector<std::optional<double>> delays{0.0};
        for (std::size_t g = 1; g <= starts.size(); ++g) {
            if (!(inputs.gaps.chg(g, arm) > 0.0)) continue;
            rounds.push_back(starts[g - 1]);
            try {
                delays.emplace_back(theory::delay_local(inputs, arm, g));
            } catch (const std::invalid_argument&) {
                delays.emplace_back(std::nullopt);
            }
        }
        for (std::size_t j = 0; j + 1 < rounds.size(); ++j) {
            push(arm, rounds[j], rounds[j + 1], delays[j], delays[j + 1]);
        }
    }
    return report;
}

}  // namespace safebandit
