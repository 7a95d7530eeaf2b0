#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "environment.hpp"

namespace safebandit::theory {

/// Everything the closed-form calculators need. K is gaps.arms() - 1.
struct TheoryInputs {
    GapProfile gaps;
    std::size_t horizon = 1;
    double delta = 0.05;
    double alpha = 1.0;
    double gamma = 1.0;

    [[nodiscard]] std::size_t arms() const { return gaps.arms() - 1; }
    [[nodiscard]] std::size_t changepoints() const { return gaps.boundaries(); }
    /// Number of boundaries at which `arm` changes.
    [[nodiscard]] std::size_t changepoints_of(std::size_t arm) const {
        std::size_t count = 0;
        for (std::size_t g = 1; g <= gaps.boundaries(); ++g) count += gaps.chg(g, arm) > 0.0 ? 1 : 0;
        return count;
    }
};

inline TheoryInputs make_inputs(const EnvSpec& env, double delta, double alpha, double gamma) {
    return TheoryInputs{env.gap_profile(), env.horizon(), delta, alpha, gamma};
}

/// B(T, delta) = 16 ln(4 log2(T / delta)).
inline double b_constant(std::size_t horizon, double delta) {
    return 16.0 * std::log(4.0 * std::log2(static_cast<double>(horizon) / delta));
}

/// 16 ln(4 log2(tau + 1) / delta), the baseline-pull log factor, at tau = T.
inline double baseline_log_factor(std::size_t tau, double delta) {
    return 16.0 * std::log(4.0 * std::log2(static_cast<double>(tau) + 1.0) / delta);
}

/// Baseline pulls needed in segment g:
///   (1 / (alpha mu_{0,g})) sum_{i in [K]} L / max{opt_{i,g}, opt_{0,g} - opt_{i,g}}.
inline double n_baseline(const TheoryInputs& in, std::size_t segment) {
    const double log_factor = baseline_log_factor(in.horizon, in.delta);
    const double baseline_gap = in.gaps.opt(segment, 0);
    double sum = 0.0;
    for (std::size_t i = 1; i <= in.arms(); ++i) {
        const double gap = in.gaps.opt(segment, i);
        sum += log_factor / std::max(gap, baseline_gap - gap);
    }
    return sum / (in.alpha * in.gaps.baseline_means.at(segment));
}

/// Which printed form of the global detection delay to evaluate.
enum class DelayForm {
    /// ceil(K + (max_i B/chg_i^2 + B/chg_0^2 + N_bse) 4K)
    product,
    /// ceil(K + 4 (K max_i B/chg_i^2 + B/chg_0^2 + N_bse))
    split,
};

/// Detection delay of global changepoint g (1..G).
inline double delay_global(const TheoryInputs& in, std::size_t g, DelayForm form = DelayForm::product) {
    const double b = b_constant(in.horizon, in.delta);
    const double k = static_cast<double>(in.arms());
    double worst = 0.0;
    for (std::size_t i = 0; i <= in.arms(); ++i) {
        if (!(in.gaps.chg(g, i) > 0.0)) throw std::invalid_argument("degenerate boundary");
    }
    for (std::size_t i = 1; i <= in.arms(); ++i) {
        const double jump = in.gaps.chg(g, i);
        worst = std::max(worst, b / (jump * jump));
    }
    const double baseline_jump = in.gaps.chg(g, 0);
    const double baseline_term = b / (baseline_jump * baseline_jump);
    const double pulls = n_baseline(in, g);
    if (form == DelayForm::product) {
        return std::ceil(k + (worst + baseline_term + pulls) * 4.0 * k);
    }
    return std::ceil(k + 4.0 * (k * worst + baseline_term + pulls));
}

/// Detection delay of arm i's changepoint at boundary g under forced exploration rate gamma.
/// The baseline term is dropped when the baseline does not change at g.
inline double delay_local(const TheoryInputs& in, std::size_t arm, std::size_t g) {
    const double jump = in.gaps.chg(g, arm);
    if (!(jump > 0.0)) throw std::invalid_argument("degenerate boundary");
    const double b = b_constant(in.horizon, in.delta);
    const double baseline_jump = in.gaps.chg(g, 0);
    const double baseline_term = baseline_jump > 0.0 ? b / (baseline_jump * baseline_jump) : 0.0;
    const double k = static_cast<double>(in.arms());
    return std::ceil(k / in.gamma + (4.0 / in.gamma) * (b / (jump * jump) + baseline_term + n_baseline(in, g)));
}

/// Critical samples to discard sub-optimal arm i in segment g, 8 ln(4 log2(t+1)/delta) / opt^2.
inline double n_opt(const TheoryInputs& in, std::size_t arm, std::size_t segment, std::size_t t) {
    const double gap = in.gaps.opt(segment, arm);
    return 8.0 * std::log(4.0 * std::log2(static_cast<double>(t) + 1.0) / in.delta) / (gap * gap);
}
inline double n_opt(const TheoryInputs& in, std::size_t arm, std::size_t segment) {
    return n_opt(in, arm, segment, in.horizon);
}

/// Critical samples to detect arm i's jump at boundary g, 8 ln(4 log2(t+1)/delta) / chg^2.
inline double n_chg(const TheoryInputs& in, std::size_t arm, std::size_t g, std::size_t t) {
    const double jump = in.gaps.chg(g, arm);
    return 8.0 * std::log(4.0 * std::log2(static_cast<double>(t) + 1.0) / in.delta) / (jump * jump);
}
inline double n_chg(const TheoryInputs& in, std::size_t arm, std::size_t g) { return n_chg(in, arm, g, in.horizon); }

struct Hardness {
    double h1;      // discarding arm i in the segment before boundary g
    double h2;      // detecting boundary g through the largest-jump arm
    double h2bar;   // detecting boundary g through arm i itself
    double h3;      // baseline trade-off in the segment after boundary g
};

/// Trade-off of pulling the baseline in a segment, for arm i in [K].
inline double h3(const GapProfile& gaps, std::size_t arm, std::size_t segment) {
    const double gap = gaps.opt(segment, arm);
    return gaps.max_optimality.at(segment) / std::max(gap, gaps.opt(segment, 0) - gap);
}

/// Hardness terms of arm i around boundary g (1..G). Zero denominators give +inf.
///
/// h1 uses segment g - 1 and the jump at g; h2 and h2bar use segment g and
/// the jump at g (the max in h2 runs over arms whose mean actually changes);
/// h3 uses segment g.
inline Hardness hardness(const TheoryInputs& in, std::size_t arm, std::size_t g) {
    const auto& gaps = in.gaps;
    const double before = gaps.opt(g - 1, arm);
    const double own_jump = gaps.chg(g, arm);
    Hardness h{};
    h.h1 = std::max(1.0 / before, before / (own_jump * own_jump));
    const double after = gaps.opt(g, arm);
    double h2 = 0.0;
    for (std::size_t j = 0; j < gaps.arms(); ++j) {
        const double jump = gaps.chg(g, j);
        if (jump > 0.0) h2 = std::max(h2, after / (jump * jump));
    }
    h.h2 = h2;
    h.h2bar = after / (own_jump * own_jump);
    h.h3 = h3(gaps, arm, g);
    return h;
}

namespace detail {

inline double log_factor(const TheoryInputs& in) {
    return std::log(std::log2(static_cast<double>(in.horizon)) / in.delta);
}

/// sum over i in [K] of h3(i, segment) / (alpha mu_{0,segment}).
inline double baseline_term(const TheoryInputs& in, std::size_t segment) {
    double sum = 0.0;
    for (std::size_t i = 1; i <= in.arms(); ++i) sum += h3(in.gaps, i, segment);
    return sum / (in.alpha * in.gaps.baseline_means.at(segment));
}

}  // namespace detail

/// Gap-dependent regret bound of the global-restart policy, order only (O-constant = 1).
///
/// The optimal arm of segment g - 1 is left out of the h1 sum (it incurs no regret there).
inline double bound_sgr(const TheoryInputs& in) {
    double total = 0.0;
    const std::size_t k = in.arms();
    for (std::size_t g = 1; g <= in.changepoints(); ++g) {
        for (std::size_t i = 0; i <= k; ++i) {
            const Hardness h = hardness(in, i, g);
            if (in.gaps.opt(g - 1, i) > 0.0) total += h.h1;
            total += h.h2;
        }
        total += detail::baseline_term(in, g - 1);
        total += static_cast<double>(k) * detail::baseline_term(in, g);
    }
    return total * detail::log_factor(in);
}

/// Gap-dependent regret bound of the local-restart policy, order only, including gamma T.
///
/// Arm i contributes only at the boundaries where its own mean changes.
inline double bound_slr(const TheoryInputs& in) {
    double total = 0.0;
    const std::size_t k = in.arms();
    for (std::size_t i = 0; i <= k; ++i) {
        for (std::size_t g = 1; g <= in.changepoints(); ++g) {
            if (!(in.gaps.chg(g, i) > 0.0)) continue;
            const Hardness h = hardness(in, i, g);
            if (in.gaps.opt(g - 1, i) > 0.0) total += h.h1;
            total += h.h2bar;
            if (i >= 1) total += detail::baseline_term(in, g - 1);
        }
    }
    for (std::size_t g = 1; g <= in.changepoints(); ++g) {
        total += static_cast<double>(k) * detail::baseline_term(in, g);
    }
    return total * detail::log_factor(in) + in.gamma * static_cast<double>(in.horizon);
}

enum class BoundKind { global, local };

/// Gap-independent forms:
///   global: G K sqrt(K T ln T) + G ln T / (alpha mu_{0,min})
///   local:  G sqrt(K T ln T)   + G ln T / (alpha mu_{0,min})
inline double bound_gap_independent(std::size_t changepoints, std::size_t k, std::size_t horizon, double alpha,
                                    double min_baseline_mean, BoundKind kind) {
    const double g = static_cast<double>(changepoints);
    const double kk = static_cast<double>(k);
    const double t = static_cast<double>(horizon);
    const double log_t = std::log(t);
    const double root = std::sqrt(kk * t * log_t);
    const double leading = kind == BoundKind::global ? g * kk * root : g * root;
    return leading + g * log_t / (alpha * min_baseline_mean);
}

inline double bound_gap_independent(const TheoryInputs& in, BoundKind kind) {
    return bound_gap_independent(in.changepoints(), in.arms(), in.horizon, in.alpha, in.gaps.min_baseline_mean(),
                                 kind);
}

}  // namespace safebandit::theory
