#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "blocktime/mining.hpp"

namespace blocktime {

// Probability that a block has been found by elapsed time t within an
// interval: p(t) = 1 - exp(-lambda t).
inline double discovery_probability(ArrivalRate rate, double t) {
    if (!(t >= 0.0)) throw std::domain_error("time must be nonnegative");
    return -std::expm1(-rate.value * t);
}

// Binary entropy in bits, with the limit convention 0*log(0) = 0.
inline double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("probability must lie in [0, 1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// Entropy of the elapsed-time state: H(p(t)).
inline double entropy_at(ArrivalRate rate, double t) {
    return binary_entropy(discovery_probability(rate, t));
}

// Time at which p(t) = 1/2 and the entropy peaks at exactly one bit.
inline double entropy_peak_time(ArrivalRate rate) {
    return std::log(2.0) / rate.value;
}

// Entropy sampled along a (nondecreasing, nonnegative) time grid. The
// profile rises to 1 bit at ln2/lambda and decays after it.
struct EntropyProfile {
    ArrivalRate rate;
    std::vector<double> times;
    std::vector<double> entropies;
};

inline EntropyProfile entropy_profile(ArrivalRate rate, std::vector<double> times) {
    EntropyProfile profile{rate, std::move(times), {}};
    profile.entropies.reserve(profile.times.size());
    for (double t : profile.times) profile.entropies.push_back(entropy_at(rate, t));
    return profile;
}

// One realized inter-arrival interval mapped to the uncertainty state in
// which it terminated.
struct DiscoveryEntropySample {
    double interval = 0.0;
    double p_at_discovery = 0.0;
    double entropy_bits = 0.0;
};

// Evaluates every realized interval at the single supplied rate, in input
// order. The rate is typically 1/mean of the full sample; a per-epoch rate
// can be used instead by calling this once per epoch.
inline std::vector<DiscoveryEntropySample> discovery_entropy_series(
    std::span<const double> intervals, ArrivalRate rate) {
    std::vector<DiscoveryEntropySample> samples;
    samples.reserve(intervals.size());
    for (double dt : intervals) {
        if (!(dt >= 0.0)) throw std::domain_error("intervals must be nonnegative");
        const double p = discovery_probability(rate, dt);
        samples.push_back({dt, p, binary_entropy(p)});
    }
    return samples;
}

}  // namespace blocktime
