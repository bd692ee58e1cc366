#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "blocktime/difficulty.hpp"
#include "blocktime/errors.hpp"
#include "blocktime/mining.hpp"
#include "blocktime/rng.hpp"
#include "blocktime/stats.hpp"

namespace blocktime {

struct MinerSpec {
    int miner_id = 0;
    double hashrate_share = 1.0;
};

// Global hashrate as a function of simulation time. Rates are frozen at the
// instant a waiting time is drawn (piecewise-constant between redraws),
// which is exact for the constant trajectory and O(gamma * interval) off
// for the exponential one.
struct HashrateTrajectory {
    enum class Kind { constant, exponential_growth };

    Kind kind = Kind::constant;
    double h0 = kHashesPerDifficultyOne / 600.0;  // one block per 600 s at difficulty 1
    double gamma = 0.0;                           // per-second growth rate

    static HashrateTrajectory constant(double h0) { return {Kind::constant, h0, 0.0}; }
    static HashrateTrajectory exponential_growth(double h0, double gamma) {
        return {Kind::exponential_growth, h0, gamma};
    }

    double at(double t) const {
        return kind == Kind::constant ? h0 : h0 * std::exp(gamma * t);
    }
};

// Propagation delay from a block's creator to each peer. Delivery is
// direct creator-to-peer; there is no relay or bandwidth model.
struct DelayModel {
    enum class Kind { zero, fixed, pairwise_matrix, random_exponential };

    Kind kind = Kind::zero;
    double seconds = 0.0;                           // fixed delay or exponential mean
    std::vector<std::vector<double>> matrix;        // [from][to], diagonal ignored

    static DelayModel zero() { return {}; }
    static DelayModel fixed(double d) { return {Kind::fixed, d, {}}; }
    static DelayModel pairwise(std::vector<std::vector<double>> m) {
        return {Kind::pairwise_matrix, 0.0, std::move(m)};
    }
    static DelayModel random_exponential(double mean) {
        return {Kind::random_exponential, mean, {}};
    }
};

enum class ObserverMode { omniscient, node };

struct SimConfig {
    std::vector<MinerSpec> miners{{0, 1.0}};
    HashrateTrajectory hashrate_trajectory{};
    DelayModel delay_model{};
    EpochPolicy policy{};
    Difficulty initial_difficulty{};
    std::int64_t run_length_blocks = 1;
    Seed seed = 0;
    ObserverMode observer = ObserverMode::omniscient;
    int observer_node = 0;

    void validate() const {
        if (miners.empty()) throw ConfigError("miners", "at least one miner is required");
        double share_sum = 0.0;
        for (std::size_t i = 0; i < miners.size(); ++i) {
            if (miners[i].miner_id != static_cast<int>(i)) {
                throw ConfigError("miners", "miner ids must be consecutive from 0");
            }
            if (!(miners[i].hashrate_share > 0.0 && miners[i].hashrate_share <= 1.0)) {
                throw ConfigError("miners", "hashrate shares must lie in (0, 1]");
            }
            share_sum += miners[i].hashrate_share;
        }
        if (std::fabs(share_sum - 1.0) > 1e-9) {
            throw ConfigError("miners", "hashrate shares must sum to 1");
        }
        if (!(hashrate_trajectory.h0 > 0.0) || !std::isfinite(hashrate_trajectory.h0) ||
            !std::isfinite(hashrate_trajectory.gamma)) {
            throw ConfigError("hashrate_trajectory", "needs a positive finite base hashrate");
        }
        switch (delay_model.kind) {
            case DelayModel::Kind::zero:
                break;
            case DelayModel::Kind::fixed:
                if (!(delay_model.seconds >= 0.0)) {
                    throw ConfigError("delay_model", "fixed delay must be nonnegative");
                }
                break;
            case DelayModel::Kind::random_exponential:
                if (!(delay_model.seconds > 0.0)) {
                    throw ConfigError("delay_model", "exponential delay mean must be positive");
                }
                break;
            case DelayModel::Kind::pairwise_matrix: {
                if (delay_model.matrix.size() != miners.size()) {
                    throw ConfigError("delay_model", "pairwise matrix must be MxM");
                }
                for (const auto& row : delay_model.matrix) {
                    if (row.size() != miners.size()) {
                        throw ConfigError("delay_model", "pairwise matrix must be MxM");
                    }
                    for (double d : row) {
                        if (!(d >= 0.0)) {
                            throw ConfigError("delay_model", "delays must be nonnegative");
                        }
                    }
                }
                break;
            }
        }
        policy.validate();
        if (run_length_blocks < 1) {
            throw ConfigError("run_length_blocks", "must be at least 1");
        }
        if (observer == ObserverMode::node &&
            (observer_node < 0 || observer_node >= static_cast<int>(miners.size()))) {
            throw ConfigError("observer", "observer node must name an existing miner");
        }
    }
};

// One mined block. arrivals[m] is the time miner m could adopt the block:
// its direct delivery time, raised to the parent's adoption time when the
// block outruns its ancestry.
struct BlockEvent {
    std::int64_t block_id = 0;
    std::int64_t height = 0;
    int miner_id = -1;  // -1 marks genesis
    std::int64_t parent_id = -1;
    double created_at = 0.0;
    std::vector<double> arrivals;
};

// One contested height: at least two blocks observed at the same height.
struct ForkRecord {
    std::int64_t height = 0;
    double first_block_time = 0.0;
    double last_competitor_time = 0.0;
    double duration = 0.0;  // last_competitor_time - first_block_time
    int n_branches = 0;
    std::int64_t winning_block_id = 0;
    double resolution_time = 0.0;  // every miner's tip on the winning branch
};

struct SimOutput {
    std::vector<BlockEvent> blocks;  // index == block_id; genesis first
    IntervalSeries canonical_intervals;
    std::vector<ForkRecord> forks;
    std::vector<RetargetEvent> retargets;
    std::vector<double> collapse_completion_times;  // per canonical block
};

// Block ids along the path genesis -> highest tip. The tip is unique at
// run end because mining halts the moment the target height is reached;
// any same-height tie would need a strictly later find.
inline std::vector<std::int64_t> canonical_chain(const std::vector<BlockEvent>& blocks) {
    std::int64_t best = 0;
    for (const auto& b : blocks) {
        if (b.height > blocks[static_cast<std::size_t>(best)].height) best = b.block_id;
    }
    std::vector<std::int64_t> chain;
    chain.reserve(static_cast<std::size_t>(blocks[static_cast<std::size_t>(best)].height) + 1);
    for (std::int64_t id = best; id >= 0; id = blocks[static_cast<std::size_t>(id)].parent_id) {
        chain.push_back(id);
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

namespace detail {

struct SimEvent {
    double time = 0.0;
    int kind = 0;  // 0 = block-found, 1 = block-arrival
    std::int64_t block_id = -1;
    int miner_id = 0;
    std::uint64_t draw_id = 0;  // found-event validity tag

    // Min-heap order; the (time, kind, block_id, miner_id) tuple is the
    // documented deterministic tie-break.
    bool operator>(const SimEvent& o) const {
        return std::tie(time, kind, block_id, miner_id) >
               std::tie(o.time, o.kind, o.block_id, o.miner_id);
    }
};

struct MinerRuntime {
    std::int64_t tip = 0;
    std::int64_t tip_height = 0;
    std::uint64_t draw_id = 0;
    Xoshiro256 find_rng;
    Xoshiro256 delay_rng;
    std::vector<std::pair<double, std::int64_t>> tip_history;  // (time, block)
    std::unordered_map<std::int64_t, std::vector<std::int64_t>> waiting_on_parent;

    MinerRuntime(Seed find_seed, Seed delay_seed)
        : find_rng(find_seed), delay_rng(delay_seed) {}
};

}  // namespace detail

// Executes the event loop: per-miner exponential block finds on the current
// tip, per-edge delivery, longest-chain adoption with first-seen
// tie-breaking, and difficulty retargets driven by the observer's arrival
// clock. Miners redraw their waiting time whenever their tip or the
// difficulty changes; memorylessness keeps the redraw distributionally
// equivalent to continuing the old draw. Deterministic for a given config.
inline SimOutput run(const SimConfig& config) {
    config.validate();
    const auto n_miners = static_cast<int>(config.miners.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<BlockEvent> blocks;
    blocks.reserve(static_cast<std::size_t>(config.run_length_blocks) + 64);
    BlockEvent genesis;
    genesis.arrivals.assign(static_cast<std::size_t>(n_miners), 0.0);
    blocks.push_back(std::move(genesis));

    std::vector<detail::MinerRuntime> miners;
    miners.reserve(static_cast<std::size_t>(n_miners));
    for (int m = 0; m < n_miners; ++m) {
        miners.emplace_back(derive_seed(config.seed, 2 * static_cast<std::uint64_t>(m)),
                            derive_seed(config.seed, 2 * static_cast<std::uint64_t>(m) + 1));
        miners.back().tip_history.emplace_back(0.0, 0);
    }

    std::priority_queue<detail::SimEvent, std::vector<detail::SimEvent>,
                        std::greater<detail::SimEvent>>
        queue;

    EpochState epoch{0, config.initial_difficulty, 0.0, 0};
    std::vector<RetargetEvent> retargets;
    std::int64_t observer_best_height = 0;
    bool mining_active = true;

    const auto miner_rate = [&](int m, double t) {
        return arrival_rate(HashRate(config.miners[static_cast<std::size_t>(m)].hashrate_share *
                                     config.hashrate_trajectory.at(t)),
                            epoch.current_difficulty)
            .value;
    };
    const auto resample = [&](int m, double t) {
        auto& miner = miners[static_cast<std::size_t>(m)];
        miner.draw_id += 1;
        const double wait = miner.find_rng.exponential(miner_rate(m, t));
        queue.push({t + wait, 0, -1, m, miner.draw_id});
    };
    const auto resample_all = [&](double t) {
        for (int m = 0; m < n_miners; ++m) resample(m, t);
    };
    const auto edge_delay = [&](int from, int to) -> double {
        switch (config.delay_model.kind) {
            case DelayModel::Kind::zero:
                return 0.0;
            case DelayModel::Kind::fixed:
                return config.delay_model.seconds;
            case DelayModel::Kind::pairwise_matrix:
                return config.delay_model
                    .matrix[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
            case DelayModel::Kind::random_exponential:
                return miners[static_cast<std::size_t>(from)].delay_rng.exponential(
                    1.0 / config.delay_model.seconds);
        }
        return 0.0;
    };

    // Feeds observer-clock height advances into the epoch machine; returns
    // whether a retarget fired (difficulty changed).
    const auto observe_height = [&](std::int64_t new_height, double t) {
        bool retargeted = false;
        while (observer_best_height < new_height) {
            ++observer_best_height;
            auto [next, event] = record_block(epoch, t, config.policy);
            epoch = next;
            if (event) {
                retargets.push_back(*event);
                retargeted = true;
            }
        }
        return retargeted;
    };

    // Delivers a block (and any buffered descendants) to miner m at time t,
    // applying longest-chain adoption as each becomes adoptable.
    const auto deliver = [&](int m, std::int64_t root_block, double t) {
        auto& miner = miners[static_cast<std::size_t>(m)];
        std::vector<std::int64_t> stack{root_block};
        while (!stack.empty()) {
            const std::int64_t id = stack.back();
            stack.pop_back();
            auto& block = blocks[static_cast<std::size_t>(id)];
            block.arrivals[static_cast<std::size_t>(m)] = t;
            if (block.height > miner.tip_height) {
                miner.tip = id;
                miner.tip_height = block.height;
                miner.tip_history.emplace_back(t, id);
                bool retargeted = false;
                if (config.observer == ObserverMode::node && m == config.observer_node) {
                    retargeted = observe_height(block.height, t);
                }
                if (mining_active) {
                    retargeted ? resample_all(t) : resample(m, t);
                }
            }
            if (const auto it = miner.waiting_on_parent.find(id);
                it != miner.waiting_on_parent.end()) {
                stack.insert(stack.end(), it->second.begin(), it->second.end());
                miner.waiting_on_parent.erase(it);
            }
        }
    };

    resample_all(0.0);

    while (!queue.empty()) {
        const detail::SimEvent ev = queue.top();
        queue.pop();

        if (ev.kind == 0) {
            auto& miner = miners[static_cast<std::size_t>(ev.miner_id)];
            if (!mining_active || ev.draw_id != miner.draw_id) continue;

            const std::int64_t id = static_cast<std::int64_t>(blocks.size());
            BlockEvent block;
            block.block_id = id;
            block.parent_id = miner.tip;
            block.height = miner.tip_height + 1;
            block.miner_id = ev.miner_id;
            block.created_at = ev.time;
            block.arrivals.assign(static_cast<std::size_t>(n_miners), nan);
            block.arrivals[static_cast<std::size_t>(ev.miner_id)] = ev.time;
            blocks.push_back(std::move(block));

            miner.tip = id;
            miner.tip_height += 1;
            miner.tip_history.emplace_back(ev.time, id);

            for (int o = 0; o < n_miners; ++o) {
                if (o == ev.miner_id) continue;
                queue.push({ev.time + edge_delay(ev.miner_id, o), 1, id, o, 0});
            }

            bool retargeted = false;
            const bool observer_sees =
                config.observer == ObserverMode::omniscient ||
                (config.observer == ObserverMode::node && ev.miner_id == config.observer_node);
            if (observer_sees) {
                retargeted = observe_height(miner.tip_height, ev.time);
            }
            if (miner.tip_height >= config.run_length_blocks) {
                mining_active = false;  // drain remaining deliveries only
            } else {
                retargeted ? resample_all(ev.time) : resample(ev.miner_id, ev.time);
            }
        } else {
            auto& block = blocks[static_cast<std::size_t>(ev.block_id)];
            auto& miner = miners[static_cast<std::size_t>(ev.miner_id)];
            const std::int64_t parent = block.parent_id;
            if (std::isnan(blocks[static_cast<std::size_t>(parent)]
                               .arrivals[static_cast<std::size_t>(ev.miner_id)])) {
                miner.waiting_on_parent[parent].push_back(ev.block_id);
                continue;
            }
            deliver(ev.miner_id, ev.block_id, ev.time);
        }
    }

    SimOutput out;
    out.retargets = std::move(retargets);

    const std::vector<std::int64_t> chain = canonical_chain(blocks);
    std::vector<char> is_canonical(blocks.size(), 0);
    for (std::int64_t id : chain) is_canonical[static_cast<std::size_t>(id)] = 1;

    const auto observed_at = [&](const BlockEvent& b) {
        return config.observer == ObserverMode::omniscient
                   ? b.created_at
                   : b.arrivals[static_cast<std::size_t>(config.observer_node)];
    };

    out.canonical_intervals.origin = SeriesOrigin::simulated;
    out.canonical_intervals.values.reserve(chain.size() - 1);
    out.collapse_completion_times.reserve(chain.size() - 1);
    for (std::size_t i = 1; i < chain.size(); ++i) {
        const auto& prev = blocks[static_cast<std::size_t>(chain[i - 1])];
        const auto& cur = blocks[static_cast<std::size_t>(chain[i])];
        out.canonical_intervals.values.push_back(observed_at(cur) - observed_at(prev));
        double last_arrival = cur.created_at;
        for (double a : cur.arrivals) last_arrival = std::max(last_arrival, a);
        out.collapse_completion_times.push_back(last_arrival - cur.created_at);
    }

    // Fork records: group blocks by height, keep contested heights.
    const auto in_winner_subtree = [&](std::int64_t id, std::int64_t winner) {
        const std::int64_t w_height = blocks[static_cast<std::size_t>(winner)].height;
        while (blocks[static_cast<std::size_t>(id)].height > w_height &&
               !is_canonical[static_cast<std::size_t>(id)]) {
            id = blocks[static_cast<std::size_t>(id)].parent_id;
        }
        if (is_canonical[static_cast<std::size_t>(id)]) {
            return blocks[static_cast<std::size_t>(id)].height >= w_height;
        }
        return id == winner;
    };

    std::unordered_map<std::int64_t, std::vector<std::int64_t>> by_height;
    for (const auto& b : blocks) {
        if (b.height > 0) by_height[b.height].push_back(b.block_id);
    }
    std::vector<std::int64_t> contested;
    for (const auto& [height, ids] : by_height) {
        if (ids.size() >= 2) contested.push_back(height);
    }
    std::sort(contested.begin(), contested.end());

    for (std::int64_t height : contested) {
        const auto& ids = by_height[height];
        ForkRecord fork;
        fork.height = height;
        fork.n_branches = static_cast<int>(ids.size());
        double first = std::numeric_limits<double>::infinity();
        double last = -std::numeric_limits<double>::infinity();
        std::int64_t winner = -1;
        for (std::int64_t id : ids) {
            const double t = observed_at(blocks[static_cast<std::size_t>(id)]);
            first = std::min(first, t);
            last = std::max(last, t);
            if (is_canonical[static_cast<std::size_t>(id)]) winner = id;
        }
        if (winner < 0) continue;  // above the canonical tip; never settled
        fork.first_block_time = first;
        fork.last_competitor_time = last;
        fork.duration = last - first;
        fork.winning_block_id = winner;

        double resolution = fork.last_competitor_time;
        bool resolved = true;
        for (const auto& miner : miners) {
            std::size_t last_outside = miner.tip_history.size();
            for (std::size_t i = 0; i < miner.tip_history.size(); ++i) {
                if (!in_winner_subtree(miner.tip_history[i].second, winner)) last_outside = i;
            }
            if (last_outside == miner.tip_history.size()) continue;  // always inside
            if (last_outside + 1 == miner.tip_history.size()) {
                resolved = false;  // still outside at run end
                break;
            }
            resolution = std::max(resolution, miner.tip_history[last_outside + 1].first);
        }
        if (!resolved) continue;
        fork.resolution_time = resolution;
        out.forks.push_back(fork);
    }

    out.blocks = std::move(blocks);
    return out;
}

inline std::vector<double> fork_durations(const SimOutput& output) {
    std::vector<double> durations;
    durations.reserve(output.forks.size());
    for (const auto& fork : output.forks) durations.push_back(fork.duration);
    return durations;
}

// max-over-miners arrival minus creation, per canonical block in height
// order. Fork duration is a lower-bound proxy for this propagation window.
inline std::vector<double> collapse_completion_times(const SimOutput& output) {
    const std::vector<std::int64_t> chain = canonical_chain(output.blocks);
    std::vector<double> times;
    times.reserve(chain.size() - 1);
    for (std::size_t i = 1; i < chain.size(); ++i) {
        const auto& b = output.blocks[static_cast<std::size_t>(chain[i])];
        double last_arrival = b.created_at;
        for (double a : b.arrivals) last_arrival = std::max(last_arrival, a);
        times.push_back(last_arrival - b.created_at);
    }
    return times;
}

}  // namespace blocktime
