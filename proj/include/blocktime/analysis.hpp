#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "blocktime/csv.hpp"
#include "blocktime/difficulty.hpp"
#include "blocktime/entropy.hpp"
#include "blocktime/errors.hpp"
#include "blocktime/stats.hpp"

namespace blocktime {

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    std::size_t count = 0;
    double density = 0.0;  // count / (n_kept * bin_width); integrates to 1
};

// Interval histogram with the fitted exponential density. The rate comes
// from the full-sample mean; truncation only limits what is binned.
struct IntervalHistogram {
    std::vector<HistogramBin> bins;
    std::vector<double> fitted_density;  // exponential pdf at bin midpoints
    double rate = 0.0;
    std::size_t n_total = 0;
    std::size_t n_kept = 0;
};

inline IntervalHistogram interval_histogram(const IntervalSeries& series, double truncate_s,
                                            double bin_s) {
    if (series.values.empty()) throw DegenerateInputError("histogram of an empty series");
    if (!(truncate_s > 0.0) || !(bin_s > 0.0)) {
        throw std::domain_error("histogram truncation and bin width must be positive");
    }
    IntervalHistogram hist;
    hist.n_total = series.values.size();
    hist.rate = 1.0 / sample_mean(series);

    const auto n_bins = static_cast<std::size_t>(std::ceil(truncate_s / bin_s));
    hist.bins.resize(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        hist.bins[i].left = bin_s * static_cast<double>(i);
        hist.bins[i].right = bin_s * static_cast<double>(i + 1);
    }
    for (double v : series.values) {
        if (v < 0.0 || v > truncate_s) continue;
        const auto idx =
            std::min(static_cast<std::size_t>(v / bin_s), n_bins - 1);
        ++hist.bins[idx].count;
        ++hist.n_kept;
    }
    if (hist.n_kept == 0) throw DegenerateInputError("no intervals inside the histogram range");
    for (auto& bin : hist.bins) {
        bin.density = static_cast<double>(bin.count) /
                      (static_cast<double>(hist.n_kept) * (bin.right - bin.left));
    }
    hist.fitted_density.reserve(n_bins);
    for (const auto& bin : hist.bins) {
        const double mid = 0.5 * (bin.left + bin.right);
        hist.fitted_density.push_back(hist.rate * std::exp(-hist.rate * mid));
    }
    return hist;
}

// Entropy-at-discovery histogram over [0, 1] bits, one sample per interval,
// evaluated at the global sample rate by default.
struct EntropyHistogram {
    std::vector<HistogramBin> bins;
    double rate = 0.0;
    std::size_t n = 0;
};

namespace detail {

inline std::vector<HistogramBin> unit_interval_bins(double bin_width) {
    if (!(bin_width > 0.0 && bin_width <= 1.0)) {
        throw std::domain_error("entropy bin width must lie in (0, 1]");
    }
    const auto n_bins = static_cast<std::size_t>(std::ceil(1.0 / bin_width));
    std::vector<HistogramBin> bins(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        bins[i].left = bin_width * static_cast<double>(i);
        bins[i].right = std::min(1.0, bin_width * static_cast<double>(i + 1));
    }
    return bins;
}

inline void bin_entropy_samples(std::vector<HistogramBin>& bins, double bin_width,
                                std::span<const double> intervals, ArrivalRate rate) {
    for (const auto& sample : discovery_entropy_series(intervals, rate)) {
        const auto idx =
            std::min(static_cast<std::size_t>(sample.entropy_bits / bin_width), bins.size() - 1);
        ++bins[idx].count;
    }
}

inline void normalize_bins(std::vector<HistogramBin>& bins, std::size_t n) {
    for (auto& bin : bins) {
        bin.density =
            static_cast<double>(bin.count) / (static_cast<double>(n) * (bin.right - bin.left));
    }
}

}  // namespace detail

inline EntropyHistogram entropy_histogram(const IntervalSeries& series, double bin_width,
                                          std::optional<ArrivalRate> rate = std::nullopt) {
    if (series.values.empty()) throw DegenerateInputError("entropy histogram of an empty series");
    EntropyHistogram hist;
    hist.bins = detail::unit_interval_bins(bin_width);
    const ArrivalRate r = rate ? *rate : ArrivalRate(1.0 / sample_mean(series));
    hist.rate = r.value;
    hist.n = series.values.size();
    detail::bin_entropy_samples(hist.bins, bin_width, series.values, r);
    detail::normalize_bins(hist.bins, hist.n);
    return hist;
}

// Per-epoch variant: each epoch's intervals evaluate at that epoch's own
// rate 1/epoch_mean, which removes the bias the single global rate carries
// across difficulty changes. The reported rate is the mean of the per-epoch
// rates.
inline EntropyHistogram entropy_histogram_per_epoch(std::span<const EpochRecord> epochs,
                                                    double bin_width) {
    if (epochs.empty()) {
        throw DegenerateInputError("per-epoch entropy histogram needs complete epochs");
    }
    EntropyHistogram hist;
    hist.bins = detail::unit_interval_bins(bin_width);
    double rate_sum = 0.0;
    for (const auto& epoch : epochs) {
        const ArrivalRate rate(1.0 / epoch.epoch_mean);
        rate_sum += rate.value;
        hist.n += epoch.intervals.size();
        detail::bin_entropy_samples(hist.bins, bin_width, epoch.intervals, rate);
    }
    hist.rate = rate_sum / static_cast<double>(epochs.size());
    detail::normalize_bins(hist.bins, hist.n);
    return hist;
}

// 1%/1%-trimmed autocorrelation table (the trim fraction is a knob).
inline std::vector<AcfPoint> trimmed_acf(const IntervalSeries& series, double trim_pct,
                                         int max_lag) {
    return autocorrelation(trim_percentiles(series, trim_pct, trim_pct), max_lag);
}

struct EpochTableRow {
    std::int64_t epoch_index = 0;
    std::int64_t start_height = 0;
    std::size_t n_intervals = 0;
    double epoch_mean = 0.0;
    double early_mean = 0.0;
    double late_mean = 0.0;
    std::optional<double> difficulty;  // joined from retargets when known
};

// Epoch-level mean table; difficulty is filled from retarget events when
// available (simulated runs) and left blank for bare arrival datasets.
inline std::vector<EpochTableRow> epoch_table(std::span<const EpochRecord> epochs,
                                              std::span<const RetargetEvent> retargets = {}) {
    std::vector<EpochTableRow> rows;
    rows.reserve(epochs.size());
    for (const auto& e : epochs) {
        EpochTableRow row;
        row.epoch_index = e.epoch_index;
        row.start_height = e.start_height;
        row.n_intervals = e.intervals.size();
        row.epoch_mean = e.epoch_mean;
        row.early_mean = e.early_mean;
        row.late_mean = e.late_mean;
        for (const auto& rt : retargets) {
            if (rt.epoch_index == e.epoch_index) {
                row.difficulty = rt.old_difficulty.value;
                break;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

// Overall and per-segment survival curves of fork durations, segmented into
// k consecutive height groups (leading groups absorb the remainder).
struct ForkSurvival {
    SurvivalCurve overall;
    std::vector<SurvivalCurve> segments;
    std::vector<std::size_t> segment_sizes;
};

namespace detail {

inline SurvivalCurve step_survival(std::span<const double> durations) {
    std::vector<double> grid = unique_sorted_thresholds(durations);
    if (grid.empty() || grid.front() > 0.0) grid.insert(grid.begin(), 0.0);
    return empirical_survival(durations, grid);
}

}  // namespace detail

inline ForkSurvival fork_survival(std::span<const double> durations_by_height, std::size_t k) {
    if (durations_by_height.empty()) {
        throw DegenerateInputError("survival of an empty fork set");
    }
    ForkSurvival out;
    out.overall = detail::step_survival(durations_by_height);
    out.segment_sizes = split_consecutive(durations_by_height.size(), k);
    std::size_t offset = 0;
    for (const std::size_t size : out.segment_sizes) {
        if (size == 0) {
            out.segments.push_back({});
            continue;
        }
        out.segments.push_back(detail::step_survival(durations_by_height.subspan(offset, size)));
        offset += size;
    }
    return out;
}

inline void write_interval_histogram_csv(std::ostream& out, const IntervalHistogram& hist) {
    CsvWriter csv(out);
    csv.row({"bin_left", "bin_right", "count", "density", "fitted_density"});
    for (std::size_t i = 0; i < hist.bins.size(); ++i) {
        const auto& b = hist.bins[i];
        csv.row({format_double(b.left), format_double(b.right),
                 format_int(static_cast<std::int64_t>(b.count)), format_double(b.density),
                 format_double(hist.fitted_density[i])});
    }
}

inline void write_entropy_histogram_csv(std::ostream& out, const EntropyHistogram& hist) {
    CsvWriter csv(out);
    csv.row({"bin_left", "bin_right", "count", "density"});
    for (const auto& b : hist.bins) {
        csv.row({format_double(b.left), format_double(b.right),
                 format_int(static_cast<std::int64_t>(b.count)), format_double(b.density)});
    }
}

inline void write_acf_csv(std::ostream& out, std::span<const AcfPoint> acf) {
    CsvWriter csv(out);
    csv.row({"lag", "rho"});
    for (const auto& point : acf) {
        csv.row({format_int(point.lag), format_double(point.rho)});
    }
}

inline void write_epoch_table_csv(std::ostream& out, std::span<const EpochTableRow> rows) {
    CsvWriter csv(out);
    csv.row({"epoch_index", "start_height", "n_intervals", "epoch_mean_s", "early_mean_s",
             "late_mean_s", "difficulty"});
    for (const auto& row : rows) {
        csv.row({format_int(row.epoch_index), format_int(row.start_height),
                 format_int(static_cast<std::int64_t>(row.n_intervals)),
                 format_double(row.epoch_mean), format_double(row.early_mean),
                 format_double(row.late_mean),
                 row.difficulty ? format_double(*row.difficulty) : ""});
    }
}

inline void write_halfsplit_csv(std::ostream& out, const HalfSplitResult& result) {
    CsvWriter csv(out);
    csv.row({"n_epochs", "mean_early_s", "mean_late_s", "mean_paired_diff_s", "ci95_low_s",
             "ci95_high_s", "frac_late_shorter", "t_statistic", "p_value", "degenerate",
             "hashrate_ratio"});
    csv.row({format_int(static_cast<std::int64_t>(result.n_epochs)),
             format_double(result.mean_early), format_double(result.mean_late),
             format_double(result.mean_paired_diff), format_double(result.ci95_low),
             format_double(result.ci95_high), format_double(result.frac_late_shorter),
             format_double(result.t_statistic), format_double(result.p_value),
             result.degenerate ? "1" : "0",
             format_double(hashrate_ratio(result.mean_early, result.mean_late))});
}

inline void write_survival_csv(std::ostream& out, const SurvivalCurve& curve) {
    CsvWriter csv(out);
    csv.row({"tau", "survival"});
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        csv.row({format_double(curve.thresholds[i]), format_double(curve.survival[i])});
    }
}

inline void write_survival_segments_csv(std::ostream& out, const ForkSurvival& survival) {
    CsvWriter csv(out);
    csv.row({"segment", "tau", "survival"});
    for (std::size_t s = 0; s < survival.segments.size(); ++s) {
        const auto& curve = survival.segments[s];
        for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
            csv.row({format_int(static_cast<std::int64_t>(s + 1)),
                     format_double(curve.thresholds[i]), format_double(curve.survival[i])});
        }
    }
}

inline void write_fork_summary_csv(std::ostream& out, std::span<const double> durations_by_height,
                                   std::size_t k) {
    const std::vector<std::size_t> sizes = split_consecutive(durations_by_height.size(), k);
    CsvWriter csv(out);
    csv.row({"segment", "n_forks", "mean_duration_s", "max_duration_s"});
    const auto summarize = [&](const std::string& label, std::span<const double> xs) {
        double sum = 0.0, max = 0.0;
        for (double x : xs) {
            sum += x;
            max = std::max(max, x);
        }
        csv.row({label, format_int(static_cast<std::int64_t>(xs.size())),
                 xs.empty() ? "" : format_double(sum / static_cast<double>(xs.size())),
                 xs.empty() ? "" : format_double(max)});
    };
    summarize("all", durations_by_height);
    std::size_t offset = 0;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        summarize(format_int(static_cast<std::int64_t>(s + 1)),
                  durations_by_height.subspan(offset, sizes[s]));
        offset += sizes[s];
    }
}

}  // namespace blocktime
