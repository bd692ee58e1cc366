#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>
#include <vector>

#include "blocktime/difficulty.hpp"
#include "blocktime/mining.hpp"
#include "blocktime/rng.hpp"

using namespace blocktime;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kTepoch = 2016.0 * 600.0;  // 1,209,600 s

EpochPolicy unclamped() {
    EpochPolicy policy;
    policy.clamp_factor = std::nullopt;
    return policy;
}

}  // namespace

TEST_CASE("retarget scales difficulty by the duration ratio") {
    const EpochPolicy policy;
    CHECK_THAT(retarget(Difficulty(100.0), kTepoch, policy).value, WithinRel(100.0, 1e-12));
    CHECK_THAT(retarget(Difficulty(100.0), kTepoch / 2.0, policy).value, WithinRel(200.0, 1e-12));
    CHECK_THROWS_AS(retarget(Difficulty(100.0), 0.0, policy), std::domain_error);
    CHECK_THROWS_AS(retarget(Difficulty(100.0), -5.0, policy), std::domain_error);
}

TEST_CASE("retarget clip works in both directions") {
    const EpochPolicy policy;  // clamp 4
    // 10x-slow epoch: raw ratio 0.1 clips to 0.25.
    auto [slow, slow_clamped] = retarget_with_clamp(Difficulty(100.0), 10.0 * kTepoch, policy);
    CHECK_THAT(slow.value, WithinRel(25.0, 1e-12));
    CHECK(slow_clamped);

    auto [fast, fast_clamped] = retarget_with_clamp(Difficulty(100.0), kTepoch / 10.0, policy);
    CHECK_THAT(fast.value, WithinRel(400.0, 1e-12));
    CHECK(fast_clamped);

    auto [mild, mild_clamped] = retarget_with_clamp(Difficulty(100.0), kTepoch / 2.0, policy);
    CHECK_THAT(mild.value, WithinRel(200.0, 1e-12));
    CHECK_FALSE(mild_clamped);

    CHECK_THAT(retarget(Difficulty(100.0), 10.0 * kTepoch, unclamped()).value,
               WithinRel(10.0, 1e-12));
}

TEST_CASE("retarget responds monotonically") {
    Xoshiro256 rng(5);
    const EpochPolicy clamped;
    for (int i = 0; i < 200; ++i) {
        const double d = std::exp(rng.uniform() * 10.0 - 2.0);
        const double obs = kTepoch * std::exp(rng.uniform() * 4.0 - 2.0);
        const double unclamped_new = retarget(Difficulty(d), obs, unclamped()).value;
        const double clamped_new = retarget(Difficulty(d), obs, clamped).value;
        if (obs < kTepoch) {
            CHECK(unclamped_new > d);
            CHECK(clamped_new >= d);
        } else if (obs > kTepoch) {
            CHECK(unclamped_new < d);
            CHECK(clamped_new <= d);
        }
    }
}

TEST_CASE("epoch state machine counts to the boundary") {
    const EpochPolicy policy;
    EpochState state{0, Difficulty(100.0), 0.0, 0};

    auto [after_one, no_event] = record_block(state, 600.0, policy);
    CHECK(after_one.blocks_in_epoch == 1);
    CHECK_FALSE(no_event.has_value());

    // March a full epoch of exactly-on-target arrivals.
    EpochState cursor{0, Difficulty(100.0), 0.0, 0};
    std::optional<RetargetEvent> event;
    for (int b = 1; b <= 2016; ++b) {
        auto [next, maybe] = record_block(cursor, 600.0 * b, policy);
        cursor = next;
        if (maybe) event = maybe;
    }
    REQUIRE(event.has_value());
    CHECK(event->epoch_index == 0);
    CHECK_THAT(event->observed_duration, WithinRel(kTepoch, 1e-12));
    CHECK_THAT(event->new_difficulty.value, WithinRel(100.0, 1e-12));
    CHECK_FALSE(event->clamped);
    CHECK(cursor.epoch_index == 1);
    CHECK(cursor.blocks_in_epoch == 0);
    CHECK_THAT(cursor.epoch_start_time, WithinRel(kTepoch, 1e-12));

    // Boundary emission from a preloaded state.
    EpochState loaded{0, Difficulty(100.0), 0.0, 2015};
    auto [after_boundary, boundary_event] = record_block(loaded, kTepoch, policy);
    CHECK(boundary_event.has_value());
    CHECK(after_boundary.blocks_in_epoch == 0);

    CHECK_THROWS_AS(record_block(cursor, cursor.epoch_start_time - 1.0, policy), OrderingError);
}

TEST_CASE("steady state interval solves the delayed-feedback fixed point") {
    const EpochPolicy policy;
    CHECK(steady_state_interval(0.0, policy) == 600.0);

    // Annual hashrate doubling.
    const double gamma = std::log(2.0) / 31557600.0;
    const double per_block = steady_state_interval(gamma, policy);
    CHECK_THAT(per_block, WithinRel(584.6657936141062, 1e-9));
    CHECK(per_block < 600.0);

    // Independent residual check of the returned fixed point.
    const double t_star = per_block * 2016.0;
    CHECK_THAT(kTepoch / t_star, WithinRel(std::exp(gamma * t_star), 1e-8));

    CHECK_THROWS_AS(steady_state_interval(-1e-9, policy), std::domain_error);
    CHECK_THROWS_AS(steady_state_interval(1.0, policy), std::domain_error);
}

TEST_CASE("closed loop under constant hashrate regulates the epoch duration") {
    const EpochPolicy policy;
    const HashRate hashrate(kHashesPerDifficultyOne / 600.0);  // lambda = 1/600 at D = 1
    Xoshiro256 rng(1234);

    EpochState state{0, Difficulty(1.0), 0.0, 0};
    double clock = 0.0;
    std::vector<double> epoch_durations, epoch_difficulties;
    while (epoch_durations.size() < 400) {
        clock += rng.exponential(arrival_rate(hashrate, state.current_difficulty).value);
        auto [next, event] = record_block(state, clock, policy);
        state = next;
        if (event) {
            epoch_durations.push_back(event->observed_duration);
            epoch_difficulties.push_back(event->old_difficulty.value);
        }
    }

    // Regulation: mean over epochs 2..50 within 1% of the target.
    double sum = 0.0;
    for (std::size_t i = 1; i < 50; ++i) sum += epoch_durations[i];
    const double mean = sum / 49.0;
    CHECK_THAT(mean, WithinRel(kTepoch, 0.01));

    // Each epoch is 2016 exponentials at its own rate 1/(600 D_k), so the
    // difficulty-normalized durations must scatter like sqrt(2016)/lambda.
    const auto sd_of = [](const std::vector<double>& xs) {
        double m = 0.0;
        for (double x : xs) m += x;
        m /= static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs) ss += (x - m) * (x - m);
        return std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0));
    };
    std::vector<double> normalized, raw;
    for (std::size_t i = 1; i < epoch_durations.size(); ++i) {
        normalized.push_back(epoch_durations[i] / epoch_difficulties[i]);
        raw.push_back(epoch_durations[i]);
    }
    const double expected_sd = std::sqrt(2016.0) * 600.0;
    CHECK(std::fabs(sd_of(normalized) - expected_sd) / expected_sd < 0.20);

    // The retarget rule re-injects last epoch's relative noise into the
    // next epoch's mean, so raw durations carry twice the variance.
    const double feedback_sd = std::sqrt(2.0) * expected_sd;
    CHECK(std::fabs(sd_of(raw) - feedback_sd) / feedback_sd < 0.25);
}

TEST_CASE("closed loop under growth shortens late halves") {
    const EpochPolicy policy;
    const double h0 = kHashesPerDifficultyOne / 600.0;
    const double gamma = 2.6e-8;
    Xoshiro256 rng(555);

    EpochState state{0, Difficulty(1.0), 0.0, 0};
    double clock = 0.0;
    std::size_t late_shorter = 0, epochs = 0;
    std::vector<double> intervals;
    intervals.reserve(2016);
    while (epochs < 60) {
        const double h = h0 * std::exp(gamma * clock);
        const double dt =
            rng.exponential(arrival_rate(HashRate(h), state.current_difficulty).value);
        clock += dt;
        intervals.push_back(dt);
        auto [next, event] = record_block(state, clock, policy);
        state = next;
        if (event) {
            double early = 0.0, late = 0.0;
            for (std::size_t i = 0; i < 1008; ++i) early += intervals[i];
            for (std::size_t i = 1008; i < 2016; ++i) late += intervals[i];
            if (late < early) ++late_shorter;
            ++epochs;
            intervals.clear();
        }
    }
    CHECK(static_cast<double>(late_shorter) / 60.0 > 0.5);
}
