#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "blocktime/csv.hpp"
#include "blocktime/difficulty.hpp"
#include "blocktime/errors.hpp"
#include "blocktime/stats.hpp"

namespace blocktime {

enum class DiagLevel { warning, error };

// One flagged input irregularity. Violations are reported, never silently
// fixed; strict parsing escalates them to ParseError.
struct Diagnostic {
    DiagLevel level = DiagLevel::warning;
    std::size_t line = 0;  // 1-based source line
    std::string code;
    std::string detail;
};

inline std::string format_diagnostic(const Diagnostic& d) {
    std::string out = d.level == DiagLevel::error ? "ERROR" : "WARNING";
    out += " line=" + std::to_string(d.line) + " code=" + d.code + " detail=" + d.detail;
    return out;
}

// Column naming for arrival files; public datasets vary.
struct ArrivalFormat {
    std::string height_column = "height";
    std::string time_column = "arrival_time";
};

struct ForkFormat {
    std::string height_column = "height";
    std::string duration_column = "duration";
};

struct ArrivalRow {
    std::int64_t height = 0;
    double arrival_time = 0.0;

    bool operator==(const ArrivalRow&) const = default;
};

// Node-observed block arrivals, ordered as supplied. `time_source` records
// which column fed arrival_time, since datasets may carry either local
// arrival clocks or header timestamps under different names.
struct ArrivalDataset {
    std::vector<ArrivalRow> rows;
    std::string time_source;
};

struct ForkRow {
    std::int64_t height = 0;
    double duration = 0.0;
};

// Fork durations ordered by height; a sparse sequence, not a contiguous
// time series.
struct ForkDataset {
    std::vector<ForkRow> rows;
};

namespace detail {

inline void escalate_or_keep(std::vector<Diagnostic>& diags, Diagnostic d, bool strict) {
    if (strict) throw ParseError(d.line, d.code + ": " + d.detail);
    diags.push_back(std::move(d));
}

}  // namespace detail

// Parses a comma-delimited arrival file (header row required, '#' comments
// ignored). Structural problems in otherwise well-formed rows — duplicate
// heights, height gaps, time regressions — are appended to `diags` with
// their line numbers; `strict` turns the first of them into a ParseError.
inline ArrivalDataset parse_arrivals(std::istream& in, const ArrivalFormat& format,
                                     std::vector<Diagnostic>& diags, bool strict = false) {
    const CsvTable table = read_csv(in);
    const std::size_t h_col = table.column(format.height_column);
    const std::size_t t_col = table.column(format.time_column);
    if (h_col == CsvTable::npos) throw ParseError(1, "missing column " + format.height_column);
    if (t_col == CsvTable::npos) throw ParseError(1, "missing column " + format.time_column);

    ArrivalDataset dataset;
    dataset.time_source = format.time_column;
    dataset.rows.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::size_t line = table.row_lines[i];
        ArrivalRow row;
        if (!parse_int(table.rows[i][h_col], row.height)) {
            throw ParseError(line, "non-integer height: " + table.rows[i][h_col]);
        }
        if (!parse_double(table.rows[i][t_col], row.arrival_time)) {
            throw ParseError(line, "non-numeric arrival time: " + table.rows[i][t_col]);
        }
        if (!dataset.rows.empty()) {
            const auto& prev = dataset.rows.back();
            const std::int64_t step = row.height - prev.height;
            if (step == 0) {
                detail::escalate_or_keep(
                    diags,
                    {DiagLevel::warning, line, "duplicate_height",
                     "height " + std::to_string(row.height) + " repeats"},
                    strict);
            } else if (step < 0) {
                detail::escalate_or_keep(
                    diags,
                    {DiagLevel::warning, line, "height_out_of_order",
                     "height " + std::to_string(row.height) + " after " +
                         std::to_string(prev.height)},
                    strict);
            } else if (step > 1) {
                detail::escalate_or_keep(
                    diags,
                    {DiagLevel::warning, line, "height_gap",
                     "gap at height " + std::to_string(row.height)},
                    strict);
            }
            if (row.arrival_time < prev.arrival_time) {
                detail::escalate_or_keep(
                    diags,
                    {DiagLevel::warning, line, "time_regression",
                     "arrival time decreases at height " + std::to_string(row.height)},
                    strict);
            }
        }
        dataset.rows.push_back(row);
    }
    return dataset;
}

inline void write_arrivals(std::ostream& out, const ArrivalDataset& dataset,
                           const ArrivalFormat& format = {}) {
    CsvWriter csv(out);
    csv.row({format.height_column, format.time_column});
    for (const auto& row : dataset.rows) {
        csv.row({format_int(row.height), format_double(row.arrival_time)});
    }
}

// Interval extraction bookkeeping: every adjacent row pair lands in exactly
// one bucket, so pairs_total = usable + gaps + regressions.
struct IntervalExtraction {
    IntervalSeries series;
    std::vector<std::int64_t> end_heights;  // height terminating each interval
    std::size_t pairs_total = 0;
    std::size_t pairs_gap = 0;         // height step != +1
    std::size_t pairs_regression = 0;  // negative time difference
};

// Successive differences within contiguous height runs. Pairs across height
// gaps are excluded; negative differences (recording artifacts) are excluded
// and counted rather than clamped.
inline IntervalExtraction to_intervals(const ArrivalDataset& dataset) {
    IntervalExtraction out;
    out.series.origin = SeriesOrigin::ingested;
    if (dataset.rows.size() < 2) {
        throw std::domain_error("need at least 2 arrival rows to form intervals");
    }
    out.pairs_total = dataset.rows.size() - 1;
    out.series.values.reserve(out.pairs_total);
    out.end_heights.reserve(out.pairs_total);
    for (std::size_t i = 1; i < dataset.rows.size(); ++i) {
        const auto& a = dataset.rows[i - 1];
        const auto& b = dataset.rows[i];
        if (b.height != a.height + 1) {
            ++out.pairs_gap;
            continue;
        }
        const double dt = b.arrival_time - a.arrival_time;
        if (dt < 0.0) {
            ++out.pairs_regression;
            continue;
        }
        out.series.values.push_back(dt);
        out.end_heights.push_back(b.height);
    }
    if (out.series.values.empty()) {
        throw std::domain_error("no usable contiguous arrival pairs");
    }
    return out;
}

enum class EpochAlignment {
    protocol,         // boundaries at absolute height multiples of blocks_per_epoch
    dataset_relative  // boundaries counted from the first ingested height
};

struct EpochGrouping {
    std::vector<EpochRecord> epochs;
    std::size_t dropped_fragments = 0;  // partial epoch windows at run edges
};

// Groups intervals into consecutive blocks_per_epoch-sized epochs. An
// interval is keyed by the height of the block that opens it, and the
// window starting at height k*blocks_per_epoch (protocol alignment) is
// epoch k. Windows broken by gaps, regressions, or the dataset edges are
// dropped and counted as fragments.
inline EpochGrouping to_epochs(const ArrivalDataset& dataset, const EpochPolicy& policy,
                               EpochAlignment alignment = EpochAlignment::protocol) {
    const IntervalExtraction extraction = to_intervals(dataset);
    const std::int64_t length = policy.blocks_per_epoch;
    const std::int64_t offset =
        alignment == EpochAlignment::protocol ? 0 : dataset.rows.front().height;

    EpochGrouping grouping;
    std::size_t i = 0;
    const std::size_t n = extraction.series.values.size();
    while (i < n) {
        // Maximal run of consecutive interval-opening heights.
        std::size_t j = i + 1;
        while (j < n && extraction.end_heights[j] == extraction.end_heights[j - 1] + 1) ++j;
        const std::int64_t run_start = extraction.end_heights[i] - 1;
        const std::int64_t run_end = extraction.end_heights[j - 1] - 1;  // inclusive

        auto floor_div = [](std::int64_t a, std::int64_t b) {
            return a >= 0 ? a / b : -((-a + b - 1) / b);
        };
        const std::int64_t first_window = floor_div(run_start - offset, length);
        const std::int64_t last_window = floor_div(run_end - offset, length);
        for (std::int64_t w = first_window; w <= last_window; ++w) {
            const std::int64_t w_start = offset + w * length;
            const std::int64_t w_end = w_start + length - 1;
            if (w_start < run_start || w_end > run_end) {
                ++grouping.dropped_fragments;
                continue;
            }
            const std::size_t base = i + static_cast<std::size_t>(w_start - run_start);
            std::vector<double> intervals(
                extraction.series.values.begin() + static_cast<std::ptrdiff_t>(base),
                extraction.series.values.begin() +
                    static_cast<std::ptrdiff_t>(base + static_cast<std::size_t>(length)));
            grouping.epochs.push_back(EpochRecord::from_intervals(w, w_start, std::move(intervals)));
        }
        i = j;
    }
    return grouping;
}

// Parses a fork-duration file ({height, duration} columns). Negative
// durations are hard errors; out-of-order heights are sorted with a
// diagnostic.
inline ForkDataset parse_forks(std::istream& in, const ForkFormat& format,
                               std::vector<Diagnostic>& diags, bool strict = false) {
    const CsvTable table = read_csv(in);
    const std::size_t h_col = table.column(format.height_column);
    const std::size_t d_col = table.column(format.duration_column);
    if (h_col == CsvTable::npos) throw ParseError(1, "missing column " + format.height_column);
    if (d_col == CsvTable::npos) throw ParseError(1, "missing column " + format.duration_column);

    ForkDataset dataset;
    dataset.rows.reserve(table.rows.size());
    bool sorted = true;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::size_t line = table.row_lines[i];
        ForkRow row;
        if (!parse_int(table.rows[i][h_col], row.height)) {
            throw ParseError(line, "non-integer height: " + table.rows[i][h_col]);
        }
        if (!parse_double(table.rows[i][d_col], row.duration)) {
            throw ParseError(line, "non-numeric duration: " + table.rows[i][d_col]);
        }
        if (row.duration < 0.0) throw ParseError(line, "negative fork duration");
        if (!dataset.rows.empty()) {
            if (row.height < dataset.rows.back().height) {
                sorted = false;
                detail::escalate_or_keep(
                    diags,
                    {DiagLevel::warning, line, "height_out_of_order",
                     "height " + std::to_string(row.height) + " after " +
                         std::to_string(dataset.rows.back().height) + "; sorting"},
                    strict);
            } else if (row.height == dataset.rows.back().height) {
                detail::escalate_or_keep(
                    diags,
                    {DiagLevel::warning, line, "duplicate_height",
                     "height " + std::to_string(row.height) + " repeats"},
                    strict);
            }
        }
        dataset.rows.push_back(row);
    }
    if (!sorted) {
        std::stable_sort(dataset.rows.begin(), dataset.rows.end(),
                         [](const ForkRow& a, const ForkRow& b) { return a.height < b.height; });
    }
    return dataset;
}

inline void write_forks(std::ostream& out, const ForkDataset& dataset,
                        const ForkFormat& format = {}) {
    CsvWriter csv(out);
    csv.row({format.height_column, format.duration_column});
    for (const auto& row : dataset.rows) {
        csv.row({format_int(row.height), format_double(row.duration)});
    }
}

}  // namespace blocktime
