#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rng.hpp"

namespace safebandit {

enum class NoiseKind { bernoulli, gaussian };

struct Noise {
    NoiseKind kind = NoiseKind::bernoulli;
    /// Standard deviation before clipping; used only for gaussian noise.
    double sigma = 0.0;
};

/// Means of all K + 1 arms from round `start` until the next segment starts.
struct Segment {
    std::size_t start = 1;
    std::vector<double> means;
};

/// Per-segment optimality gaps and per-boundary changepoint gaps.
///
/// Segments are numbered 0..G. Boundary g (1..G) is the changepoint that
/// starts segment g; changepoint(g, i) = |mu_{i,g-1} - mu_{i,g}|.
struct GapProfile {
    std::vector<std::vector<double>> optimality;    // [segment][arm]
    std::vector<std::vector<double>> jumps;         // [boundary - 1][arm]
    std::vector<double> baseline_means;             // [segment]
    std::vector<double> max_optimality;             // [segment], over arms 1..K

    [[nodiscard]] std::size_t segments() const noexcept { return optimality.size(); }
    [[nodiscard]] std::size_t boundaries() const noexcept { return jumps.size(); }
    [[nodiscard]] std::size_t arms() const noexcept { return optimality.empty() ? 0 : optimality.front().size(); }
    [[nodiscard]] double opt(std::size_t segment, std::size_t arm) const { return optimality.at(segment).at(arm); }
    [[nodiscard]] double chg(std::size_t boundary, std::size_t arm) const {
        if (boundary < 1) throw std::out_of_range("boundary index starts at 1");
        return jumps.at(boundary - 1).at(arm);
    }
    [[nodiscard]] double min_baseline_mean() const {
        return *std::min_element(baseline_means.begin(), baseline_means.end());
    }

    friend bool operator==(const GapProfile&, const GapProfile&) = default;
};

inline GapProfile compute_gap_profile(const std::vector<Segment>& segments) {
    GapProfile profile;
    for (const auto& segment : segments) {
        const double best = *std::max_element(segment.means.begin(), segment.means.end());
        std::vector<double> gaps;
        gaps.reserve(segment.means.size());
        double worst_gap = 0.0;
        for (std::size_t i = 0; i < segment.means.size(); ++i) {
            gaps.push_back(best - segment.means[i]);
            if (i > 0) worst_gap = std::max(worst_gap, gaps.back());
        }
        profile.optimality.push_back(std::move(gaps));
        profile.baseline_means.push_back(segment.means.front());
        profile.max_optimality.push_back(worst_gap);
    }
    for (std::size_t g = 1; g < segments.size(); ++g) {
        std::vector<double> jump;
        for (std::size_t i = 0; i < segments[g].means.size(); ++i) {
            jump.push_back(std::abs(segments[g - 1].means[i] - segments[g].means[i]));
        }
        profile.jumps.push_back(std::move(jump));
    }
    return profile;
}

/// Piecewise-constant mean table for arms 0..K (arm 0 is the baseline).
///
/// A changepoint at t_c means round t_c already uses the new segment.
class EnvSpec {
  public:
    EnvSpec(std::size_t k, std::size_t horizon, std::vector<Segment> segments, Noise noise = {},
            std::vector<std::string> notes = {})
        : k_(k), horizon_(horizon), segments_(std::move(segments)), noise_(noise), notes_(std::move(notes)) {
        validate();
        gaps_ = compute_gap_profile(segments_);
    }

    [[nodiscard]] std::size_t arms() const noexcept { return k_; }          // K, excluding the baseline
    [[nodiscard]] std::size_t horizon() const noexcept { return horizon_; }
    [[nodiscard]] const Noise& noise() const noexcept { return noise_; }
    [[nodiscard]] const std::vector<Segment>& segments() const noexcept { return segments_; }
    [[nodiscard]] const std::vector<std::string>& notes() const noexcept { return notes_; }
    [[nodiscard]] const GapProfile& gap_profile() const noexcept { return gaps_; }
    [[nodiscard]] std::size_t changepoint_count() const noexcept { return segments_.size() - 1; }

    /// Starting rounds of segments 1..G.
    [[nodiscard]] std::vector<std::size_t> changepoints() const {
        std::vector<std::size_t> out;
        for (std::size_t g = 1; g < segments_.size(); ++g) out.push_back(segments_[g].start);
        return out;
    }

    /// Changepoints at which `arm` changes its mean.
    [[nodiscard]] std::vector<std::size_t> changepoints_of(std::size_t arm) const {
        std::vector<std::size_t> out;
        for (std::size_t g = 1; g < segments_.size(); ++g) {
            if (segments_[g].means.at(arm) != segments_[g - 1].means.at(arm)) out.push_back(segments_[g].start);
        }
        return out;
    }

    [[nodiscard]] std::size_t segment_index(std::size_t t) const {
        if (t < 1 || t > horizon_) throw std::out_of_range("round out of range");
        const auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                         [](std::size_t round, const Segment& s) { return round < s.start; });
        return static_cast<std::size_t>(it - segments_.begin()) - 1;
    }

    [[nodiscard]] double mean_of(std::size_t arm, std::size_t t) const {
        if (arm > k_) throw std::out_of_range("arm out of range");
        return segments_[segment_index(t)].means[arm];
    }

    [[nodiscard]] double best_mean(std::size_t t) const {
        const auto& means = segments_[segment_index(t)].means;
        return *std::max_element(means.begin(), means.end());
    }

    /// Reward of `arm` at round t. Uses draws (t, 0) and, for gaussian noise, (t, 1).
    [[nodiscard]] double sample(std::size_t arm, std::size_t t, const CounterRng& rng) const {
        const double mean = mean_of(arm, t);
        if (noise_.kind == NoiseKind::bernoulli) {
            return rng.uniform(t, 0) < mean ? 1.0 : 0.0;
        }
        return std::clamp(mean + noise_.sigma * rng.normal(t, 0), 0.0, 1.0);
    }

  private:
    void validate() const {
        if (k_ < 1) throw std::invalid_argument("K must be at least 1");
        if (horizon_ < 1) throw std::invalid_argument("T must be at least 1");
        if (segments_.empty()) throw std::invalid_argument("at least one segment is required");
        if (segments_.front().start != 1) throw std::invalid_argument("first segment must start at round 1");
        if (noise_.kind == NoiseKind::gaussian && !(noise_.sigma > 0.0)) {
            throw std::invalid_argument("gaussian noise needs sigma > 0");
        }
        for (std::size_t g = 0; g < segments_.size(); ++g) {
            const auto& segment = segments_[g];
            if (segment.means.size() != k_ + 1) {
                throw std::invalid_argument("segment " + std::to_string(segment.start) + " must list K+1 means");
            }
            for (double m : segment.means) {
                if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("means must lie in [0,1]");
            }
            if (segment.start > horizon_) throw std::invalid_argument("segment starts after the horizon");
            if (g > 0) {
                if (segment.start <= segments_[g - 1].start) {
                    throw std::invalid_argument("segment starts must be strictly increasing");
                }
                if (segment.means == segments_[g - 1].means) {
                    throw std::invalid_argument("no arm changes at boundary " + std::to_string(segment.start));
                }
            }
        }
    }

    std::size_t k_;
    std::size_t horizon_;
    std::vector<Segment> segments_;
    Noise noise_;
    std::vector<std::string> notes_;
    GapProfile gaps_;
};

// Environment file format
// -----------------------
//   # leading comment lines are kept as notes
//   K = 5
//   T = 8000
//   noise = bernoulli            (or: noise = gaussian, followed by sigma = <real>)
//   segment 1 = 0.5 0.2 0.35 0.85 0.15 0.65
//   segment 2000 = ...
//
// Keys must appear in this order, each once; anything else is an error.

namespace detail {

inline std::string format_real(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

inline std::string_view trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r");
    return text.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view text, std::size_t line) {
    T value{};
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end) {
        throw std::invalid_argument("line " + std::to_string(line) + ": bad number '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace detail

inline EnvSpec parse_env(std::string_view text) {
    std::vector<std::string> notes;
    std::optional<std::size_t> k;
    std::optional<std::size_t> horizon;
    std::optional<Noise> noise;
    bool sigma_seen = false;
    std::vector<Segment> segments;
    bool body_started = false;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto next = text.find('\n', pos);
        const auto raw = text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
        pos = next == std::string_view::npos ? text.size() + 1 : next + 1;
        ++line_no;
        const auto line = detail::trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (!body_started) notes.emplace_back(raw.substr(0, raw.find_last_not_of("\r") + 1));
            continue;
        }
        body_started = true;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        auto fail = [&](const std::string& what) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": " + what);
        };
        if (key == "K") {
            if (k || horizon || noise || !segments.empty()) fail("'K' must come first and only once");
            k = detail::parse_number<std::size_t>(value, line_no);
        } else if (key == "T") {
            if (!k || horizon) fail("'T' must follow 'K' and appear once");
            horizon = detail::parse_number<std::size_t>(value, line_no);
        } else if (key == "noise") {
            if (!horizon || noise) fail("'noise' must follow 'T' and appear once");
            if (value == "bernoulli") {
                noise = Noise{NoiseKind::bernoulli, 0.0};
            } else if (value == "gaussian") {
                noise = Noise{NoiseKind::gaussian, 0.0};
            } else {
                fail("unknown noise '" + std::string(value) + "'");
            }
        } else if (key == "sigma") {
            if (!noise || noise->kind != NoiseKind::gaussian || sigma_seen || !segments.empty()) {
                fail("'sigma' is only allowed once, right after 'noise = gaussian'");
            }
            noise->sigma = detail::parse_number<double>(value, line_no);
            sigma_seen = true;
        } else if (key.starts_with("segment")) {
            if (!noise) fail("segments must follow the header keys");
            if (noise->kind == NoiseKind::gaussian && !sigma_seen) fail("gaussian noise requires 'sigma'");
            const auto start_text = detail::trim(key.substr(7));
            if (start_text.empty() || key.size() == 7 || (key[7] != ' ' && key[7] != '\t')) {
                fail("expected 'segment <start> = <means>'");
            }
            Segment segment;
            segment.start = detail::parse_number<std::size_t>(start_text, line_no);
            std::string_view rest = value;
            while (!rest.empty()) {
                const auto space = rest.find_first_of(" \t");
                const auto token = rest.substr(0, space);
                segment.means.push_back(detail::parse_number<double>(token, line_no));
                rest = space == std::string_view::npos ? std::string_view{} : detail::trim(rest.substr(space));
            }
            segments.push_back(std::move(segment));
        } else {
            fail("unknown key '" + std::string(key) + "'");
        }
    }
    if (!k || !horizon || !noise) throw std::invalid_argument("missing one of the keys K, T, noise");
    if (noise->kind == NoiseKind::gaussian && !sigma_seen) throw std::invalid_argument("gaussian noise requires 'sigma'");
    return EnvSpec(*k, *horizon, std::move(segments), *noise, std::move(notes));
}

inline std::string serialize_env(const EnvSpec& env) {
    std::ostringstream out;
    for (const auto& note : env.notes()) out << note << '\n';
    out << "K = " << env.arms() << '\n';
    out << "T = " << env.horizon() << '\n';
    if (env.noise().kind == NoiseKind::bernoulli) {
        out << "noise = bernoulli\n";
    } else {
        out << "noise = gaussian\n";
        out << "sigma = " << detail::format_real(env.noise().sigma) << '\n';
    }
    for (const auto& segment : env.segments()) {
        out << "segment " << segment.start << " =";
        for (double m : segment.means) out << ' ' << detail::format_real(m);
        out << '\n';
    }
    return out.str();
}

inline EnvSpec load_env_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open environment file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_env(buffer.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

}  // namespace safebandit
