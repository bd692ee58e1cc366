#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "blocktime/rng.hpp"

namespace blocktime {

// Hash attempts per difficulty-1 block on average; the protocol scale that
// turns a dimensionless difficulty into a per-trial success probability.
inline constexpr double kHashesPerDifficultyOne = 4294967296.0;  // 2^32

// Dimensionless difficulty: ratio of the difficulty-1 reference target to
// the current target. Values below 1 are allowed for toy scales.
struct Difficulty {
    double value = 1.0;

    Difficulty() = default;
    explicit Difficulty(double v) : value(v) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw std::domain_error("difficulty must be a positive finite real");
        }
    }
};

// Global hashrate in hashes per second.
struct HashRate {
    double value = 1.0;

    HashRate() = default;
    explicit HashRate(double v) : value(v) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw std::domain_error("hashrate must be a positive finite real");
        }
    }
};

// Expected block discoveries per second.
struct ArrivalRate {
    double value = 1.0;

    ArrivalRate() = default;
    explicit ArrivalRate(double v) : value(v) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw std::domain_error("arrival rate must be a positive finite real");
        }
    }

    double mean_interval() const { return 1.0 / value; }
};

// Success probability of a single hash attempt.
struct TrialProbability {
    double value = 1.0;

    TrialProbability() = default;
    explicit TrialProbability(double v) : value(v) {
        if (!std::isfinite(v) || v <= 0.0 || v > 1.0) {
            throw std::domain_error("per-trial probability must lie in (0, 1]");
        }
    }
};

// theta = 1 / (D * 2^32). Difficulties below 2^-32 would give a probability
// above 1 and are rejected.
inline TrialProbability per_trial_probability(Difficulty d) {
    const double theta = 1.0 / (d.value * kHashesPerDifficultyOne);
    if (theta > 1.0) {
        throw std::domain_error("difficulty below 2^-32: per-trial probability would exceed 1");
    }
    return TrialProbability(theta);
}

// lambda = H * theta = H / (D * 2^32), blocks per second.
inline ArrivalRate arrival_rate(HashRate h, Difficulty d) {
    return ArrivalRate(h.value / (d.value * kHashesPerDifficultyOne));
}

// Pr[T > t] with the waiting time counted in discrete trials:
// (1 - theta)^trials, evaluated in the log domain so it stays exact for
// tiny theta and astronomically many trials.
inline double survival_exact(TrialProbability theta, std::uint64_t trials) {
    if (trials == 0) return 1.0;
    if (theta.value == 1.0) return 0.0;
    return std::exp(static_cast<double>(trials) * std::log1p(-theta.value));
}

// Pr[T > t] in the rare-event limit: exp(-lambda * t).
inline double survival_limit(ArrivalRate rate, double t) {
    if (!(t >= 0.0)) throw std::domain_error("time must be nonnegative");
    return std::exp(-rate.value * t);
}

// Inverse-CDF map from a uniform (0,1) variate to an exponential waiting
// time: -ln(u) / lambda.
inline double waiting_time_from_uniform(ArrivalRate rate, double u) {
    return -std::log(u) / rate.value;
}

inline double sample_waiting_time(ArrivalRate rate, Xoshiro256& rng) {
    return waiting_time_from_uniform(rate, rng.uniform());
}

// Rate of the minimum of independent exponential waiting times: the sum.
inline ArrivalRate aggregate_rate(std::span<const ArrivalRate> rates) {
    if (rates.empty()) throw std::domain_error("aggregate rate of an empty miner set");
    double sum = 0.0;
    for (const auto& r : rates) sum += r.value;
    return ArrivalRate(sum);
}

// H ~= D * 2^32 / E[T], the mean-interval hashrate estimator.
inline HashRate estimate_hashrate(Difficulty d, double mean_interval) {
    if (!(mean_interval > 0.0)) throw std::domain_error("mean interval must be positive");
    return HashRate(d.value * kHashesPerDifficultyOne / mean_interval);
}

}  // namespace blocktime
