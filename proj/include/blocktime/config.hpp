#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "blocktime/csv.hpp"
#include "blocktime/errors.hpp"
#include "blocktime/netsim.hpp"

namespace blocktime {

// Per-analysis knobs shared by the CLI and the campaign config.
struct AnalysisOptions {
    int max_lag = 20;
    double trim_pct = 1.0;
    double hist_trunc_s = 3000.0;
    double hist_bin_s = 60.0;
    double entropy_bin = 0.02;
    std::size_t segments = 3;
};

// A full simulation-and-analysis campaign: one SimConfig, a replication
// count, the analyses to run, and their knobs.
struct CampaignSpec {
    SimConfig sim;
    int replications = 1;
    std::vector<std::string> analyses;
    std::string output_dir;
    AnalysisOptions analysis;
};

namespace detail {

inline std::string trim_ws(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return std::string(s);
}

inline std::vector<std::string> split_list(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(trim_ws(s.substr(start)));
            break;
        }
        parts.push_back(trim_ws(s.substr(start, pos - start)));
        start = pos + 1;
    }
    return parts;
}

inline double require_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    if (!parse_double(value, v)) throw ConfigError(key, "expected a number, got '" + value + "'");
    return v;
}

inline std::int64_t require_int(const std::string& key, const std::string& value) {
    std::int64_t v = 0;
    if (!parse_int(value, v)) throw ConfigError(key, "expected an integer, got '" + value + "'");
    return v;
}

// name(arg1, arg2, ...) -> {name, args}; plain names give empty args.
inline std::pair<std::string, std::vector<std::string>> parse_call(const std::string& key,
                                                                   const std::string& value) {
    const std::size_t open = value.find('(');
    if (open == std::string::npos) return {trim_ws(value), {}};
    if (value.back() != ')') throw ConfigError(key, "unbalanced parentheses in '" + value + "'");
    const std::string name = trim_ws(value.substr(0, open));
    const std::string inner = value.substr(open + 1, value.size() - open - 2);
    std::vector<std::string> args;
    if (!trim_ws(inner).empty()) args = split_list(inner, ',');
    return {name, args};
}

}  // namespace detail

// Parses the flat `key = value` campaign format: one key per line, '#'
// comments, unknown keys rejected. `seed` and `run_length_blocks` are
// required; everything else has the documented default.
inline CampaignSpec parse_campaign(std::istream& in) {
    CampaignSpec spec;
    bool have_seed = false;
    bool have_run_length = false;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string stripped = detail::trim_ws(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ParseError(line_no, "expected 'key = value', got '" + stripped + "'");
        }
        const std::string key = detail::trim_ws(std::string_view(stripped).substr(0, eq));
        const std::string value = detail::trim_ws(std::string_view(stripped).substr(eq + 1));

        if (key == "seed") {
            spec.sim.seed = static_cast<Seed>(detail::require_int(key, value));
            have_seed = true;
        } else if (key == "run_length_blocks") {
            spec.sim.run_length_blocks = detail::require_int(key, value);
            have_run_length = true;
        } else if (key == "miners") {
            spec.sim.miners.clear();
            int id = 0;
            for (const auto& part : detail::split_list(value, ',')) {
                spec.sim.miners.push_back({id++, detail::require_double(key, part)});
            }
        } else if (key == "hashrate_trajectory") {
            auto [name, args] = detail::parse_call(key, value);
            if (name == "constant" && args.size() == 1) {
                spec.sim.hashrate_trajectory =
                    HashrateTrajectory::constant(detail::require_double(key, args[0]));
            } else if (name == "exponential_growth" && args.size() == 2) {
                spec.sim.hashrate_trajectory = HashrateTrajectory::exponential_growth(
                    detail::require_double(key, args[0]), detail::require_double(key, args[1]));
            } else {
                throw ConfigError(key, "expected constant(H) or exponential_growth(H0, gamma)");
            }
        } else if (key == "delay_model") {
            auto [name, args] = detail::parse_call(key, value);
            if (name == "zero" && args.empty()) {
                spec.sim.delay_model = DelayModel::zero();
            } else if (name == "fixed" && args.size() == 1) {
                spec.sim.delay_model = DelayModel::fixed(detail::require_double(key, args[0]));
            } else if (name == "random_exponential" && args.size() == 1) {
                spec.sim.delay_model =
                    DelayModel::random_exponential(detail::require_double(key, args[0]));
            } else if (name == "pairwise_matrix" && args.size() == 1) {
                std::vector<std::vector<double>> matrix;
                for (const auto& row_text : detail::split_list(args[0], ';')) {
                    std::vector<double> row;
                    std::istringstream cells(row_text);
                    std::string cell;
                    while (cells >> cell) row.push_back(detail::require_double(key, cell));
                    matrix.push_back(std::move(row));
                }
                spec.sim.delay_model = DelayModel::pairwise(std::move(matrix));
            } else {
                throw ConfigError(key,
                                  "expected zero, fixed(d), random_exponential(mean), or "
                                  "pairwise_matrix(r00 r01; r10 r11)");
            }
        } else if (key == "blocks_per_epoch") {
            spec.sim.policy.blocks_per_epoch = detail::require_int(key, value);
        } else if (key == "target_block_interval") {
            spec.sim.policy.target_block_interval = detail::require_double(key, value);
        } else if (key == "clamp_factor") {
            if (value == "none") {
                spec.sim.policy.clamp_factor = std::nullopt;
            } else {
                spec.sim.policy.clamp_factor = detail::require_double(key, value);
            }
        } else if (key == "initial_difficulty") {
            const double d = detail::require_double(key, value);
            if (!(d > 0.0)) throw ConfigError(key, "must be positive");
            spec.sim.initial_difficulty = Difficulty(d);
        } else if (key == "observer") {
            if (value == "omniscient") {
                spec.sim.observer = ObserverMode::omniscient;
            } else if (value.rfind("node:", 0) == 0) {
                spec.sim.observer = ObserverMode::node;
                spec.sim.observer_node =
                    static_cast<int>(detail::require_int(key, value.substr(5)));
            } else {
                throw ConfigError(key, "expected omniscient or node:<id>");
            }
        } else if (key == "replications") {
            spec.replications = static_cast<int>(detail::require_int(key, value));
            if (spec.replications < 1) throw ConfigError(key, "must be at least 1");
        } else if (key == "analyses") {
            spec.analyses.clear();
            for (auto& name : detail::split_list(value, ',')) {
                if (!name.empty()) spec.analyses.push_back(name);
            }
        } else if (key == "output_dir") {
            spec.output_dir = value;
        } else if (key == "max_lag") {
            spec.analysis.max_lag = static_cast<int>(detail::require_int(key, value));
        } else if (key == "trim_pct") {
            spec.analysis.trim_pct = detail::require_double(key, value);
        } else if (key == "hist_trunc_s") {
            spec.analysis.hist_trunc_s = detail::require_double(key, value);
        } else if (key == "hist_bin_s") {
            spec.analysis.hist_bin_s = detail::require_double(key, value);
        } else if (key == "entropy_bin") {
            spec.analysis.entropy_bin = detail::require_double(key, value);
        } else if (key == "segments") {
            spec.analysis.segments =
                static_cast<std::size_t>(detail::require_int(key, value));
        } else {
            throw ConfigError(key, "unknown configuration key");
        }
    }

    if (!have_seed) throw ConfigError("seed", "missing required key");
    if (!have_run_length) throw ConfigError("run_length_blocks", "missing required key");
    spec.sim.validate();
    return spec;
}

// Canonical one-line-per-field rendering of everything that defines the
// experiment; the hash of this string changes exactly when some such field
// changes. output_dir is a location, not an experiment parameter, and is
// deliberately left out.
inline std::string canonical_config_string(const CampaignSpec& spec) {
    std::string out;
    out += "seed=" + format_int(static_cast<std::int64_t>(spec.sim.seed)) + "\n";
    out += "run_length_blocks=" + format_int(spec.sim.run_length_blocks) + "\n";
    out += "miners=";
    for (std::size_t i = 0; i < spec.sim.miners.size(); ++i) {
        if (i > 0) out += ",";
        out += format_double(spec.sim.miners[i].hashrate_share);
    }
    out += "\n";
    const auto& traj = spec.sim.hashrate_trajectory;
    out += "hashrate_trajectory=";
    if (traj.kind == HashrateTrajectory::Kind::constant) {
        out += "constant(" + format_double(traj.h0) + ")";
    } else {
        out += "exponential_growth(" + format_double(traj.h0) + "," +
               format_double(traj.gamma) + ")";
    }
    out += "\n";
    const auto& delay = spec.sim.delay_model;
    out += "delay_model=";
    switch (delay.kind) {
        case DelayModel::Kind::zero:
            out += "zero";
            break;
        case DelayModel::Kind::fixed:
            out += "fixed(" + format_double(delay.seconds) + ")";
            break;
        case DelayModel::Kind::random_exponential:
            out += "random_exponential(" + format_double(delay.seconds) + ")";
            break;
        case DelayModel::Kind::pairwise_matrix:
            out += "pairwise_matrix(";
            for (std::size_t r = 0; r < delay.matrix.size(); ++r) {
                if (r > 0) out += ";";
                for (std::size_t c = 0; c < delay.matrix[r].size(); ++c) {
                    if (c > 0) out += " ";
                    out += format_double(delay.matrix[r][c]);
                }
            }
            out += ")";
            break;
    }
    out += "\n";
    out += "blocks_per_epoch=" + format_int(spec.sim.policy.blocks_per_epoch) + "\n";
    out += "target_block_interval=" + format_double(spec.sim.policy.target_block_interval) + "\n";
    out += "clamp_factor=";
    out += spec.sim.policy.clamp_factor ? format_double(*spec.sim.policy.clamp_factor) : "none";
    out += "\n";
    out += "initial_difficulty=" + format_double(spec.sim.initial_difficulty.value) + "\n";
    out += "observer=";
    out += spec.sim.observer == ObserverMode::omniscient
               ? "omniscient"
               : "node:" + format_int(spec.sim.observer_node);
    out += "\n";
    out += "replications=" + format_int(spec.replications) + "\n";
    out += "analyses=";
    for (std::size_t i = 0; i < spec.analyses.size(); ++i) {
        if (i > 0) out += ",";
        out += spec.analyses[i];
    }
    out += "\n";
    out += "max_lag=" + format_int(spec.analysis.max_lag) + "\n";
    out += "trim_pct=" + format_double(spec.analysis.trim_pct) + "\n";
    out += "hist_trunc_s=" + format_double(spec.analysis.hist_trunc_s) + "\n";
    out += "hist_bin_s=" + format_double(spec.analysis.hist_bin_s) + "\n";
    out += "entropy_bin=" + format_double(spec.analysis.entropy_bin) + "\n";
    out += "segments=" + format_int(static_cast<std::int64_t>(spec.analysis.segments)) + "\n";
    return out;
}

// FNV-1a over the canonical rendering, as a 16-hex-digit tag.
inline std::string config_hash(const CampaignSpec& spec) {
    const std::string canon = canonical_config_string(spec);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[h & 0xF];
        h >>= 4;
    }
    return out;
}

}  // namespace blocktime
