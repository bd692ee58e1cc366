#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "blocktime/errors.hpp"

namespace blocktime {

enum class SeriesOrigin { simulated, ingested };

// Ordered inter-arrival durations in seconds; the universal statistics input.
struct IntervalSeries {
    std::vector<double> values;
    SeriesOrigin origin = SeriesOrigin::simulated;
};

namespace detail {

inline double mean_of(std::span<const double> xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

// Continued fraction for the incomplete beta function, evaluated with
// Lentz's algorithm.
inline double ibeta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw std::domain_error("beta parameters must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("beta argument must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::ibeta_cf(a, b, x) / a;
    }
    return 1.0 - front * detail::ibeta_cf(b, a, 1.0 - x) / b;
}

// Student-t CDF through the incomplete beta identity
// P(T <= t) = 1 - I_{df/(df+t^2)}(df/2, 1/2) / 2 for t >= 0.
inline double student_t_cdf(double t, double df) {
    if (!(df > 0.0)) throw std::domain_error("degrees of freedom must be positive");
    if (t == 0.0) return 0.5;
    const double tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
    return t > 0.0 ? 1.0 - tail : tail;
}

// Inverse t CDF by bisection; monotonicity makes this exact to double
// precision within ~200 halvings.
inline double student_t_quantile(double p, double df) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile probability must lie in (0, 1)");
    if (p == 0.5) return 0.0;
    const bool upper = p > 0.5;
    const double target = upper ? p : 1.0 - p;
    double lo = 0.0, hi = 1.0;
    while (student_t_cdf(hi, df) < target) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14 * (1.0 + hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (student_t_cdf(mid, df) < target ? lo : hi) = mid;
    }
    const double q = 0.5 * (lo + hi);
    return upper ? q : -q;
}

inline double sample_mean(const IntervalSeries& series) {
    if (series.values.empty()) throw std::domain_error("sample mean of an empty series");
    return detail::mean_of(series.values);
}

// Drops values strictly below the lower cutoff and strictly above the upper
// cutoff, keeping the survivors in their original order. Cutoffs follow the
// nearest-rank rule: with k = floor(pct/100 * n) observations nominally cut
// from a side, the cutoff is the (k+1)-th order statistic from that side,
// so ties at the cutoff always survive.
inline IntervalSeries trim_percentiles(const IntervalSeries& series, double lower_pct,
                                       double upper_pct) {
    if (!(lower_pct >= 0.0) || !(upper_pct >= 0.0) || !(lower_pct + upper_pct < 100.0)) {
        throw std::domain_error("trim percentages must be nonnegative and sum below 100");
    }
    const std::size_t n = series.values.size();
    if (n == 0) return {{}, series.origin};

    std::vector<double> sorted = series.values;
    std::sort(sorted.begin(), sorted.end());
    const auto k_lo = static_cast<std::size_t>(lower_pct / 100.0 * static_cast<double>(n));
    const auto k_hi = static_cast<std::size_t>(upper_pct / 100.0 * static_cast<double>(n));
    const double lo_cut = sorted[k_lo];
    const double hi_cut = sorted[n - 1 - k_hi];

    IntervalSeries trimmed{{}, series.origin};
    trimmed.values.reserve(n - std::min(n, k_lo + k_hi));
    for (double v : series.values) {
        if (v >= lo_cut && v <= hi_cut) trimmed.values.push_back(v);
    }
    return trimmed;
}

struct AcfPoint {
    int lag = 0;
    double rho = 0.0;
};

// Sample autocorrelation: centered lagged products over the full centered
// sum of squares, for lags 1..max_lag.
inline std::vector<AcfPoint> autocorrelation(const IntervalSeries& series, int max_lag) {
    const auto& x = series.values;
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    if (max_lag < 1) throw std::domain_error("max_lag must be at least 1");
    if (n <= max_lag) throw std::domain_error("series must be longer than max_lag");

    const double mean = detail::mean_of(x);
    double denom = 0.0;
    for (double v : x) denom += (v - mean) * (v - mean);
    if (denom == 0.0) throw DegenerateInputError("autocorrelation of a constant series");

    std::vector<AcfPoint> acf;
    acf.reserve(static_cast<std::size_t>(max_lag));
    for (int k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::ptrdiff_t i = 0; i + k < n; ++i) {
            num += (x[static_cast<std::size_t>(i)] - mean) *
                   (x[static_cast<std::size_t>(i + k)] - mean);
        }
        acf.push_back({k, num / denom});
    }
    return acf;
}

struct SurvivalCurve {
    std::vector<double> thresholds;
    std::vector<double> survival;
};

// S(tau) = fraction of durations >= tau (note the closed inequality).
inline SurvivalCurve empirical_survival(std::span<const double> durations,
                                        std::span<const double> thresholds) {
    if (durations.empty()) throw std::domain_error("survival of an empty duration set");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] >= 0.0)) throw std::domain_error("thresholds must be nonnegative");
        if (i > 0 && thresholds[i] < thresholds[i - 1]) {
            throw std::domain_error("thresholds must be sorted ascending");
        }
    }
    std::vector<double> sorted(durations.begin(), durations.end());
    std::sort(sorted.begin(), sorted.end());

    SurvivalCurve curve;
    curve.thresholds.assign(thresholds.begin(), thresholds.end());
    curve.survival.reserve(thresholds.size());
    const auto n = static_cast<double>(sorted.size());
    for (double tau : thresholds) {
        const auto it = std::lower_bound(sorted.begin(), sorted.end(), tau);
        curve.survival.push_back(static_cast<double>(sorted.end() - it) / n);
    }
    return curve;
}

// Exact step-curve grid: the sorted distinct duration values.
inline std::vector<double> unique_sorted_thresholds(std::span<const double> durations) {
    std::vector<double> grid(durations.begin(), durations.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

// Log-spaced grid for log-log survival plots; requires 0 < lo <= hi.
inline std::vector<double> log_spaced_thresholds(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0 && hi >= lo) || n < 2) {
        throw std::domain_error("log grid needs 0 < lo <= hi and n >= 2");
    }
    std::vector<double> grid(n);
    const double step = (std::log(hi) - std::log(lo)) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = std::exp(std::log(lo) + step * static_cast<double>(i));
    }
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

// One difficulty epoch's intervals with precomputed half means.
struct EpochRecord {
    std::int64_t epoch_index = 0;
    std::int64_t start_height = 0;
    std::vector<double> intervals;
    double early_mean = 0.0;
    double late_mean = 0.0;
    double epoch_mean = 0.0;

    static EpochRecord from_intervals(std::int64_t epoch_index, std::int64_t start_height,
                                      std::vector<double> intervals) {
        if (intervals.size() < 2 || intervals.size() % 2 != 0) {
            throw std::invalid_argument("epoch intervals must come in a nonzero even count");
        }
        EpochRecord rec;
        rec.epoch_index = epoch_index;
        rec.start_height = start_height;
        rec.intervals = std::move(intervals);
        const std::size_t half = rec.intervals.size() / 2;
        const std::span<const double> all(rec.intervals);
        rec.early_mean = detail::mean_of(all.first(half));
        rec.late_mean = detail::mean_of(all.last(half));
        rec.epoch_mean = detail::mean_of(all);
        return rec;
    }
};

struct HalfSplitResult {
    std::size_t n_epochs = 0;
    double mean_early = 0.0;
    double mean_late = 0.0;
    double mean_paired_diff = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    double frac_late_shorter = 0.0;
    double t_statistic = 0.0;
    double p_value = 1.0;
    bool degenerate = false;  // zero-variance paired differences
};

// Paired early/late half comparison across epochs: mean paired difference
// (late - early), its 95% t confidence interval, and the two-sided paired
// t-test. Zero-variance differences are reported as degenerate with p = 1
// rather than erroring.
inline HalfSplitResult half_split_analysis(std::span<const EpochRecord> epochs) {
    if (epochs.size() < 2) throw std::invalid_argument("half-split needs at least 2 epochs");
    const std::size_t width = epochs.front().intervals.size();
    for (const auto& e : epochs) {
        if (e.intervals.size() != width) {
            throw std::invalid_argument("half-split epochs must all have the same interval count");
        }
    }

    HalfSplitResult res;
    res.n_epochs = epochs.size();
    const auto n = static_cast<double>(epochs.size());
    std::vector<double> diffs;
    diffs.reserve(epochs.size());
    std::size_t shorter = 0;
    double early_sum = 0.0, late_sum = 0.0;
    for (const auto& e : epochs) {
        diffs.push_back(e.late_mean - e.early_mean);
        early_sum += e.early_mean;
        late_sum += e.late_mean;
        if (e.late_mean < e.early_mean) ++shorter;
    }
    res.mean_early = early_sum / n;
    res.mean_late = late_sum / n;
    res.mean_paired_diff = detail::mean_of(diffs);
    res.frac_late_shorter = static_cast<double>(shorter) / n;

    double ss = 0.0;
    for (double d : diffs) ss += (d - res.mean_paired_diff) * (d - res.mean_paired_diff);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (sd == 0.0) {
        res.degenerate = true;
        res.t_statistic = 0.0;
        res.p_value = 1.0;
        res.ci95_low = res.ci95_high = res.mean_paired_diff;
        return res;
    }

    const double se = sd / std::sqrt(n);
    res.t_statistic = res.mean_paired_diff / se;
    res.p_value = 2.0 * (1.0 - student_t_cdf(std::fabs(res.t_statistic), n - 1.0));
    const double t_crit = student_t_quantile(0.975, n - 1.0);
    res.ci95_low = res.mean_paired_diff - t_crit * se;
    res.ci95_high = res.mean_paired_diff + t_crit * se;
    return res;
}

// H_late/H_early inferred from half means: difficulty is fixed within an
// epoch, so the hashrate ratio is the inverse interval ratio.
inline double hashrate_ratio(double mean_early, double mean_late) {
    if (!(mean_early > 0.0 && mean_late > 0.0)) {
        throw std::domain_error("half means must be positive");
    }
    return mean_early / mean_late;
}

// One-sample Kolmogorov-Smirnov statistic against Uniform(0,1):
// sup |F_n(x) - x| over the sorted sample.
inline double ks_uniform(std::span<const double> values) {
    if (values.empty()) throw std::domain_error("KS statistic of an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double x = sorted[i];
        if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("KS sample values must lie in [0, 1]");
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, x - lo, hi - x});
    }
    return d;
}

// Sizes of k consecutive groups covering n items; remainders go to the
// leading groups, e.g. 232 over 3 -> {78, 77, 77}.
inline std::vector<std::size_t> split_consecutive(std::size_t n, std::size_t k) {
    if (k == 0) throw std::domain_error("segment count must be positive");
    std::vector<std::size_t> sizes(k, n / k);
    for (std::size_t i = 0; i < n % k; ++i) ++sizes[i];
    return sizes;
}

}  // namespace blocktime
