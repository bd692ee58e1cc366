#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>

#include "blocktime/errors.hpp"
#include "blocktime/mining.hpp"

namespace blocktime {

// Retarget schedule: epoch length in blocks, the per-block interval the
// feedback aims for, and an optional clip on the adjustment ratio. The
// reference implementation clips to [1/4, 4]; clamp_factor = nullopt gives
// the unclipped idealized rule.
struct EpochPolicy {
    std::int64_t blocks_per_epoch = 2016;
    double target_block_interval = 600.0;
    std::optional<double> clamp_factor = 4.0;

    double epoch_duration_target() const {
        return static_cast<double>(blocks_per_epoch) * target_block_interval;
    }

    void validate() const {
        if (blocks_per_epoch < 1) throw ConfigError("blocks_per_epoch", "must be at least 1");
        if (!(target_block_interval > 0.0)) {
            throw ConfigError("target_block_interval", "must be positive");
        }
        if (clamp_factor && !(*clamp_factor >= 1.0)) {
            throw ConfigError("clamp_factor", "must be at least 1 when set");
        }
    }
};

// Difficulty update at an epoch boundary.
struct RetargetEvent {
    std::int64_t epoch_index = 0;   // epoch that just completed
    double observed_duration = 0.0;
    Difficulty old_difficulty;
    Difficulty new_difficulty;
    bool clamped = false;
};

// D_next = D * T_epoch / T_observed, with the ratio clipped to
// [1/clamp, clamp] when the policy carries a clamp. Returns the clip flag
// alongside the new difficulty.
inline std::pair<Difficulty, bool> retarget_with_clamp(Difficulty d, double observed_duration,
                                                       const EpochPolicy& policy) {
    if (!(observed_duration > 0.0)) {
        throw std::domain_error("observed epoch duration must be positive");
    }
    double ratio = policy.epoch_duration_target() / observed_duration;
    bool clamped = false;
    if (policy.clamp_factor) {
        const double c = *policy.clamp_factor;
        if (ratio > c) {
            ratio = c;
            clamped = true;
        } else if (ratio < 1.0 / c) {
            ratio = 1.0 / c;
            clamped = true;
        }
    }
    return {Difficulty(d.value * ratio), clamped};
}

inline Difficulty retarget(Difficulty d, double observed_duration, const EpochPolicy& policy) {
    return retarget_with_clamp(d, observed_duration, policy).first;
}

// Per-epoch accounting between retargets. A value type: record_block
// returns the successor state rather than mutating in place.
struct EpochState {
    std::int64_t epoch_index = 0;
    Difficulty current_difficulty;
    double epoch_start_time = 0.0;
    std::int64_t blocks_in_epoch = 0;
};

// Counts one block arrival. On the blocks_per_epoch-th block the epoch
// closes: a RetargetEvent is emitted, the counter resets, and the next
// epoch starts at this arrival time. Arrival times must be nondecreasing.
inline std::pair<EpochState, std::optional<RetargetEvent>> record_block(
    const EpochState& state, double arrival_time, const EpochPolicy& policy) {
    if (arrival_time < state.epoch_start_time) {
        throw OrderingError("block arrival predates the current epoch start");
    }
    EpochState next = state;
    next.blocks_in_epoch += 1;
    if (next.blocks_in_epoch < policy.blocks_per_epoch) {
        return {next, std::nullopt};
    }

    RetargetEvent event;
    event.epoch_index = state.epoch_index;
    event.observed_duration = arrival_time - state.epoch_start_time;
    event.old_difficulty = state.current_difficulty;
    auto [new_difficulty, clamped] =
        retarget_with_clamp(state.current_difficulty, event.observed_duration, policy);
    event.new_difficulty = new_difficulty;
    event.clamped = clamped;

    next.epoch_index += 1;
    next.current_difficulty = new_difficulty;
    next.epoch_start_time = arrival_time;
    next.blocks_in_epoch = 0;
    return {next, event};
}

// Mean per-block interval the closed loop settles to when hashrate grows as
// e^(gamma t): the feedback retargets off the previous epoch, so the epoch
// duration T* solves T_epoch / T* = exp(gamma T*). Solved by bisection on
// (0, T_epoch]; the left side is strictly decreasing in T* there, making
// the root unique. Returns T*/blocks_per_epoch.
inline double steady_state_interval(double growth_rate_per_second, const EpochPolicy& policy) {
    if (!(growth_rate_per_second >= 0.0)) {
        throw std::domain_error("growth rate must be nonnegative");
    }
    if (growth_rate_per_second == 0.0) return policy.target_block_interval;

    const double t_epoch = policy.epoch_duration_target();
    const auto residual = [&](double t) {
        return t_epoch / t - std::exp(growth_rate_per_second * t);
    };
    double lo = t_epoch / 64.0;
    double hi = t_epoch;
    if (!(residual(lo) > 0.0)) {
        throw std::domain_error("growth too fast: no steady state in (T_epoch/64, T_epoch]");
    }
    while (hi - lo > 1e-10 * hi) {
        const double mid = 0.5 * (lo + hi);
        (residual(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) / static_cast<double>(policy.blocks_per_epoch);
}

}  // namespace blocktime
