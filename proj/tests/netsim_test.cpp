#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "blocktime/netsim.hpp"
#include "blocktime/stats.hpp"
#include "test_support.hpp"

using namespace blocktime;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// lambda = 1/600 blocks/s at difficulty 1.
constexpr double kH600 = kHashesPerDifficultyOne / 600.0;

SimConfig base_config(std::size_t n_miners, std::int64_t blocks, Seed seed) {
    SimConfig config;
    config.miners.clear();
    for (std::size_t m = 0; m < n_miners; ++m) {
        config.miners.push_back({static_cast<int>(m), 1.0 / static_cast<double>(n_miners)});
    }
    config.hashrate_trajectory = HashrateTrajectory::constant(kH600);
    config.initial_difficulty = Difficulty(1.0);
    config.run_length_blocks = blocks;
    config.seed = seed;
    config.policy.blocks_per_epoch = 1000000000;  // difficulty frozen
    return config;
}

}  // namespace

TEST_CASE("config validation names the offending field") {
    SimConfig config = base_config(2, 100, 1);
    config.miners[0].hashrate_share = 0.9;  // sums to 1.4
    try {
        config.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "miners");
    }

    config = base_config(1, 100, 1);
    config.run_length_blocks = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);

    config = base_config(1, 100, 1);
    config.delay_model = DelayModel::fixed(-1.0);
    CHECK_THROWS_AS(config.validate(), ConfigError);

    config = base_config(2, 100, 1);
    config.delay_model = DelayModel::pairwise({{0.0, 1.0}});
    CHECK_THROWS_AS(config.validate(), ConfigError);

    config = base_config(2, 100, 1);
    config.observer = ObserverMode::node;
    config.observer_node = 5;
    CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("single miner produces a fork-free exponential chain") {
    SimConfig config = base_config(1, 10000, 42);
    config.delay_model = DelayModel::fixed(25.0);  // irrelevant with one miner
    const SimOutput output = run(config);

    CHECK(output.forks.empty());
    CHECK(output.blocks.size() == 10001);  // genesis + run length
    REQUIRE(output.canonical_intervals.values.size() == 10000);

    std::vector<double> pit;
    pit.reserve(output.canonical_intervals.values.size());
    for (double dt : output.canonical_intervals.values) {
        pit.push_back(1.0 - std::exp(-dt / 600.0));
    }
    CHECK(ks_uniform(pit) < 0.02);
}

TEST_CASE("parallel mining preserves the aggregate arrival structure") {
    // Five unequal miners, zero delay: canonical intervals must look like
    // draws at the summed rate.
    SimConfig config = base_config(5, 10000, 79);
    config.miners = {{0, 0.4}, {1, 0.3}, {2, 0.15}, {3, 0.1}, {4, 0.05}};
    const SimOutput output = run(config);

    CHECK(output.forks.empty());  // exact ties have probability zero
    std::vector<double> pit;
    for (double dt : output.canonical_intervals.values) {
        pit.push_back(1.0 - std::exp(-dt / 600.0));
    }
    CHECK(ks_uniform(pit) < 0.02);
}

TEST_CASE("two equal miners with zero delay never fork") {
    const SimOutput output = run(base_config(2, 10000, 7));
    CHECK(output.forks.empty());
}

TEST_CASE("identical configs give bitwise-identical outputs") {
    SimConfig config = base_config(3, 2000, 99);
    config.delay_model = DelayModel::random_exponential(5.0);
    const SimOutput a = run(config);
    const SimOutput b = run(config);

    REQUIRE(a.blocks.size() == b.blocks.size());
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        REQUIRE(a.blocks[i].created_at == b.blocks[i].created_at);
        REQUIRE(a.blocks[i].miner_id == b.blocks[i].miner_id);
        REQUIRE(a.blocks[i].parent_id == b.blocks[i].parent_id);
        REQUIRE(a.blocks[i].arrivals == b.blocks[i].arrivals);
    }
    REQUIRE(a.canonical_intervals.values == b.canonical_intervals.values);
    REQUIRE(a.collapse_completion_times == b.collapse_completion_times);
    REQUIRE(a.forks.size() == b.forks.size());
    for (std::size_t i = 0; i < a.forks.size(); ++i) {
        REQUIRE(a.forks[i].duration == b.forks[i].duration);
        REQUIRE(a.forks[i].resolution_time == b.forks[i].resolution_time);
    }
}

TEST_CASE("every block extends an existing parent") {
    SimConfig config = base_config(3, 3000, 5);
    config.delay_model = DelayModel::fixed(10.0);
    const SimOutput output = run(config);

    for (const auto& block : output.blocks) {
        if (block.height == 0) continue;
        const auto& parent = output.blocks[static_cast<std::size_t>(block.parent_id)];
        REQUIRE(parent.height == block.height - 1);
        REQUIRE(parent.created_at <= block.created_at);
    }
    const auto chain = canonical_chain(output.blocks);
    for (std::size_t i = 0; i < chain.size(); ++i) {
        REQUIRE(output.blocks[static_cast<std::size_t>(chain[i])].height ==
                static_cast<std::int64_t>(i));
    }
}

TEST_CASE("fixed-delay forks are bounded by the delay") {
    const double delay = 10.0;
    SimConfig config = base_config(2, 20000, 2718);
    config.delay_model = DelayModel::fixed(delay);
    const SimOutput output = run(config);

    REQUIRE_FALSE(output.forks.empty());
    for (const auto& fork : output.forks) {
        CHECK(fork.duration >= 0.0);
        CHECK(fork.duration <= delay);
        CHECK(fork.n_branches >= 2);
        CHECK(fork.resolution_time >= fork.last_competitor_time);
    }

    // Broadcast takes exactly the fixed delay, fork or not, and the fork
    // window can never exceed the winner's propagation window.
    const auto chain = canonical_chain(output.blocks);
    const auto completions = collapse_completion_times(output);
    REQUIRE(completions.size() == chain.size() - 1);
    for (double c : completions) CHECK_THAT(c, WithinRel(delay, 1e-9));
    for (const auto& fork : output.forks) {
        const std::size_t idx = static_cast<std::size_t>(fork.height) - 1;
        CHECK(fork.duration <= completions[idx] + 1e-12);
    }

    CHECK(fork_durations(output).size() == output.forks.size());
}

TEST_CASE("zero delay collapses propagation windows to zero") {
    const SimOutput output = run(base_config(3, 2000, 10));
    for (double c : output.collapse_completion_times) CHECK(c == 0.0);
}

TEST_CASE("mean fork frequency is nondecreasing in the delay") {
    const std::vector<double> delays{0.0, 5.0, 10.0, 20.0};
    std::vector<double> mean_freq;
    for (const double d : delays) {
        double total = 0.0;
        for (Seed seed = 0; seed < 20; ++seed) {
            SimConfig config = base_config(2, 2000, 1000 + seed);
            config.delay_model = d == 0.0 ? DelayModel::zero() : DelayModel::fixed(d);
            total += static_cast<double>(run(config).forks.size()) / 2000.0;
        }
        mean_freq.push_back(total / 20.0);
    }
    for (std::size_t i = 1; i < mean_freq.size(); ++i) {
        CHECK(mean_freq[i] >= mean_freq[i - 1]);
    }
    CHECK(mean_freq.front() == 0.0);
    CHECK(mean_freq.back() > 0.0);
}

TEST_CASE("difficulty regulation works inside the event loop") {
    SimConfig config = base_config(1, 50 * 2016, 31337);
    config.policy = EpochPolicy{};  // real 2016-block epochs
    const SimOutput output = run(config);

    REQUIRE(output.retargets.size() == 50);
    double sum = 0.0;
    for (std::size_t i = 1; i < output.retargets.size(); ++i) {
        sum += output.retargets[i].observed_duration;
        REQUIRE(output.retargets[i].epoch_index == static_cast<std::int64_t>(i));
    }
    CHECK_THAT(sum / 49.0, WithinRel(2016.0 * 600.0, 0.01));
}

TEST_CASE("toy epochs retarget at each boundary") {
    SimConfig config = base_config(1, 350, 4);
    config.policy.blocks_per_epoch = 100;
    const SimOutput output = run(config);
    REQUIRE(output.retargets.size() == 3);
    CHECK(output.retargets[0].epoch_index == 0);
    CHECK(output.retargets[2].epoch_index == 2);
    CHECK(output.retargets[0].old_difficulty.value == 1.0);
}

TEST_CASE("per-node observation keeps the fork invariants") {
    SimConfig config = base_config(3, 5000, 123);
    config.delay_model = DelayModel::fixed(8.0);
    config.observer = ObserverMode::node;
    config.observer_node = 1;
    const SimOutput output = run(config);

    REQUIRE(output.canonical_intervals.values.size() == 5000);
    for (double dt : output.canonical_intervals.values) CHECK(dt >= 0.0);
    for (const auto& fork : output.forks) {
        CHECK(fork.duration >= 0.0);
        CHECK(fork.resolution_time >= fork.last_competitor_time);
        CHECK(fork.last_competitor_time >= fork.first_block_time);
    }
}

TEST_CASE("blocks outrunning their ancestry wait for the parent") {
    // Miner 0 is far from node 2 while miner 1 is close, so a child mined
    // by 1 on a block from 0 often reaches node 2 before its parent and
    // must wait for it.
    SimConfig config = base_config(3, 5000, 2020);
    config.miners = {{0, 0.45}, {1, 0.45}, {2, 0.1}};
    config.hashrate_trajectory = HashrateTrajectory::constant(kHashesPerDifficultyOne / 60.0);
    const std::vector<std::vector<double>> matrix{
        {0.0, 0.1, 80.0}, {0.1, 0.0, 5.0}, {80.0, 5.0, 0.0}};
    config.delay_model = DelayModel::pairwise(matrix);
    const SimOutput output = run(config);

    bool any_held_back = false;
    for (const auto& block : output.blocks) {
        if (block.height == 0) continue;
        const auto& parent = output.blocks[static_cast<std::size_t>(block.parent_id)];
        for (std::size_t node = 0; node < 3; ++node) {
            const double at = block.arrivals[node];
            REQUIRE_FALSE(std::isnan(at));
            // Adoption-capable times are monotone along every chain.
            REQUIRE(at >= parent.arrivals[node]);
            if (block.miner_id != static_cast<int>(node)) {
                const double raw =
                    block.created_at + matrix[static_cast<std::size_t>(block.miner_id)][node];
                REQUIRE(at >= raw - 1e-9);
                if (at > raw + 1e-9) any_held_back = true;
            }
        }
    }
    CHECK(any_held_back);

    // Still deterministic under heavy reordering.
    const SimOutput again = run(config);
    REQUIRE(again.blocks.size() == output.blocks.size());
    for (std::size_t i = 0; i < output.blocks.size(); ++i) {
        REQUIRE(again.blocks[i].arrivals == output.blocks[i].arrivals);
    }
}

TEST_CASE("pairwise delays deliver along the configured edges") {
    SimConfig config = base_config(2, 1000, 8);
    config.delay_model = DelayModel::pairwise({{0.0, 3.0}, {7.0, 0.0}});
    const SimOutput output = run(config);

    for (const auto& block : output.blocks) {
        if (block.height == 0) continue;
        const int creator = block.miner_id;
        const int other = 1 - creator;
        const double expected = creator == 0 ? 3.0 : 7.0;
        // Delivery may be delayed further only by a missing parent.
        CHECK(block.arrivals[static_cast<std::size_t>(other)] >=
              block.created_at + expected - 1e-12);
        CHECK(block.arrivals[static_cast<std::size_t>(creator)] == block.created_at);
    }
}
