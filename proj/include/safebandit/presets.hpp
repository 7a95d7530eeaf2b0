#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

#include "environment.hpp"

namespace safebandit {

// Built-in testbeds. The horizons, arm counts, changepoint rounds and the
// constant 0.35 baseline of local6 are fixed; the per-segment means are
// reconstructions with the right structure (which arms change, which arm is
// optimal per segment), not published numbers. The same text ships under
// config/presets/.

inline constexpr std::string_view kGlobal6 =
    "# global6: every arm, baseline included, changes at 2000, 4000 and 6000.\n"
    "# Per-segment means are a reconstruction, not published values.\n"
    "K = 5\n"
    "T = 8000\n"
    "noise = bernoulli\n"
    "segment 1 = 0.5 0.2 0.35 0.85 0.15 0.65\n"
    "segment 2000 = 0.4 0.75 0.1 0.25 0.55 0.3\n"
    "segment 4000 = 0.55 0.35 0.9 0.6 0.2 0.1\n"
    "segment 6000 = 0.45 0.15 0.4 0.3 0.85 0.6\n";

inline constexpr std::string_view kLocal6 =
    "# local6: constant baseline 0.35; only some arms change at 2000, 4000 and 6000.\n"
    "# Per-segment means of arms 1..5 are a reconstruction, not published values.\n"
    "K = 5\n"
    "T = 8000\n"
    "noise = bernoulli\n"
    "segment 1 = 0.35 0.8 0.3 0.5 0.2 0.15\n"
    "segment 2000 = 0.35 0.25 0.3 0.5 0.85 0.15\n"
    "segment 4000 = 0.35 0.25 0.9 0.5 0.4 0.15\n"
    "segment 6000 = 0.35 0.7 0.2 0.5 0.4 0.6\n";

inline constexpr std::string_view kAlpha4 =
    "# alpha4: local changes at 500, 1000 and 1500 with a constant baseline, for risk sweeps.\n"
    "# Per-segment means are a reconstruction, not published values.\n"
    "K = 3\n"
    "T = 1500\n"
    "noise = bernoulli\n"
    "segment 1 = 0.35 0.7 0.2 0.45\n"
    "segment 500 = 0.35 0.2 0.2 0.8\n"
    "segment 1000 = 0.35 0.2 0.75 0.3\n"
    "segment 1500 = 0.35 0.6 0.75 0.3\n";

inline constexpr std::array<std::string_view, 3> kPresetNames{"global6", "local6", "alpha4"};

inline std::string_view builtin_text(std::string_view name) {
    if (name == "global6") return kGlobal6;
    if (name == "local6") return kLocal6;
    if (name == "alpha4") return kAlpha4;
    throw std::invalid_argument("unknown preset: " + std::string(name));
}

inline EnvSpec builtin(std::string_view name) { return parse_env(builtin_text(name)); }

inline bool is_builtin(std::string_view name) {
    for (auto preset : kPresetNames) {
        if (preset == name) return true;
    }
    return false;
}

/// A preset name or a path to an environment file.
inline EnvSpec load_env(const std::string& name_or_path) {
    return is_builtin(name_or_path) ? builtin(name_or_path) : load_env_file(name_or_path);
}

}  // namespace safebandit
