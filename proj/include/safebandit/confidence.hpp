#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace safebandit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Confidence level and leading constant of the anytime radius
/// sqrt(c * ln(4 * log2(t + 1) / delta) / n).
struct ConfidenceParams {
    double delta = 0.05;
    double radius_constant = 2.0;

    ConfidenceParams() = default;
    explicit ConfidenceParams(double delta_, double radius_constant_ = 2.0)
        : delta(delta_), radius_constant(radius_constant_) {
        validate();
    }

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0)) {
            throw std::invalid_argument("delta must lie in (0,1)");
        }
        if (!(radius_constant > 0.0)) {
            throw std::invalid_argument("radius constant must be positive");
        }
    }
};

/// Rewards of one arm observed since its last restart.
///
/// Samples are indexed 1..count. prefix_sums()[k-1] is the left fold of the
/// first k samples, so any contiguous slice mean costs O(1).
class ArmState {
  public:
    explicit ArmState(std::size_t arm_id, std::size_t restart_round = 1)
        : arm_id_(arm_id), restart_round_(restart_round) {}

    void push(double reward) {
        const double previous = prefix_.empty() ? 0.0 : prefix_.back();
        samples_.push_back(reward);
        prefix_.push_back(previous + reward);
    }

    /// Erase the history and mark `round` as the new restart round.
    void restart(std::size_t round) {
        samples_.clear();
        prefix_.clear();
        restart_round_ = round;
    }

    [[nodiscard]] std::size_t arm_id() const noexcept { return arm_id_; }
    [[nodiscard]] std::size_t restart_round() const noexcept { return restart_round_; }
    [[nodiscard]] std::size_t count() const noexcept { return samples_.size(); }
    [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }
    [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
    [[nodiscard]] std::span<const double> prefix_sums() const noexcept { return prefix_; }

    /// Sum of samples 1..k (k may be 0).
    [[nodiscard]] double prefix(std::size_t k) const noexcept { return k == 0 ? 0.0 : prefix_[k - 1]; }

  private:
    std::size_t arm_id_;
    std::size_t restart_round_;
    std::vector<double> samples_;
    std::vector<double> prefix_;
};

/// Mean of samples lo..hi (1-based, inclusive).
inline double slice_mean(const ArmState& state, std::size_t lo, std::size_t hi) {
    if (lo < 1 || lo > hi || hi > state.count()) {
        throw std::out_of_range("empty slice");
    }
    return (state.prefix(hi) - state.prefix(lo - 1)) / static_cast<double>(hi - lo + 1);
}

/// The round-dependent factor sqrt(c * ln(4 * log2(t + 1) / delta)); beta(n, t) is this over sqrt(n).
inline double radius_scale(std::size_t t, const ConfidenceParams& params) {
    if (t < 1) {
        throw std::invalid_argument("invalid round");
    }
    const double log_term = std::log(4.0 * std::log2(static_cast<double>(t) + 1.0) / params.delta);
    return std::sqrt(params.radius_constant * log_term);
}

/// Anytime confidence radius for n samples at round t; infinite when n = 0.
inline double beta(std::size_t n, std::size_t t, const ConfidenceParams& params) {
    if (t < 1) {
        throw std::invalid_argument("invalid round");
    }
    if (n == 0) {
        return kInf;
    }
    const double log_term = std::log(4.0 * std::log2(static_cast<double>(t) + 1.0) / params.delta);
    return std::sqrt(params.radius_constant * log_term / static_cast<double>(n));
}

inline double ucb(const ArmState& state, std::size_t t, const ConfidenceParams& params) {
    if (state.empty()) {
        return kInf;
    }
    return slice_mean(state, 1, state.count()) + beta(state.count(), t, params);
}

inline double lcb(const ArmState& state, std::size_t t, const ConfidenceParams& params) {
    if (state.empty()) {
        return -kInf;
    }
    return slice_mean(state, 1, state.count()) - beta(state.count(), t, params);
}

/// Index of the largest UCB among arms[first..]; ties go to the smallest index.
inline std::size_t argmax_ucb(std::span<const ArmState> arms, std::size_t t, const ConfidenceParams& params,
                              std::size_t first) {
    if (first >= arms.size()) {
        throw std::invalid_argument("no candidate arms");
    }
    std::size_t best = first;
    double best_value = ucb(arms[first], t, params);
    for (std::size_t i = first + 1; i < arms.size(); ++i) {
        const double value = ucb(arms[i], t, params);
        if (value > best_value) {
            best_value = value;
            best = i;
        }
    }
    return best;
}

/// The UCB arm: argmax over the non-baseline arms 1..K of `arms` (arms[0] is the baseline).
inline std::size_t ucb_arm(std::span<const ArmState> arms, std::size_t t, const ConfidenceParams& params) {
    return argmax_ucb(arms, t, params, 1);
}

}  // namespace safebandit
