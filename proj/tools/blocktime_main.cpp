// Command-line front end: `simulate` runs seeded campaigns and writes the
// raw CSVs, `analyze` turns arrival/fork data into plot-ready tables, and
// `report` prints a fixed-order summary of an output directory.
//
// Exit codes: 0 success, 2 usage/config, 3 I/O, 4 degenerate data.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blocktime/blocktime.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitDegenerate = 4;

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw blocktime::IoError("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw blocktime::IoError("cannot open " + path.string() + " for reading");
    return in;
}

void finish_output(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw blocktime::IoError("write failed for " + path.string());
}

void print_diagnostics(const std::vector<blocktime::Diagnostic>& diags) {
    for (const auto& d : diags) std::cerr << blocktime::format_diagnostic(d) << '\n';
}

// ---------------------------------------------------------------------------
// simulate

struct ObserverClock {
    blocktime::ObserverMode mode;
    int node;

    double at(const blocktime::BlockEvent& block) const {
        return mode == blocktime::ObserverMode::omniscient
                   ? block.created_at
                   : block.arrivals[static_cast<std::size_t>(node)];
    }
};

void write_sim_arrivals(std::ostream& out, const blocktime::SimOutput& output,
                        const ObserverClock& clock) {
    blocktime::CsvWriter csv(out);
    csv.row({"height", "arrival_time"});
    for (const std::int64_t id : blocktime::canonical_chain(output.blocks)) {
        const auto& block = output.blocks[static_cast<std::size_t>(id)];
        csv.row({blocktime::format_int(block.height), blocktime::format_double(clock.at(block))});
    }
}

void write_sim_intervals(std::ostream& out, const blocktime::SimOutput& output,
                         std::optional<int> replication = std::nullopt) {
    blocktime::CsvWriter csv(out);
    if (replication) {
        csv.row({"replication", "height", "interval_s"});
    } else {
        csv.row({"height", "interval_s"});
    }
    for (std::size_t i = 0; i < output.canonical_intervals.values.size(); ++i) {
        std::vector<std::string> fields;
        if (replication) fields.push_back(blocktime::format_int(*replication));
        fields.push_back(blocktime::format_int(static_cast<std::int64_t>(i + 1)));
        fields.push_back(blocktime::format_double(output.canonical_intervals.values[i]));
        csv.row(fields);
    }
}

void write_sim_blocks(std::ostream& out, const blocktime::SimOutput& output,
                      std::optional<int> replication = std::nullopt) {
    blocktime::CsvWriter csv(out);
    std::vector<std::string> header{"block_id", "height",     "miner_id",
                                    "parent_id", "created_at", "propagated_at"};
    if (replication) header.insert(header.begin(), "replication");
    csv.row(header);
    for (const auto& block : output.blocks) {
        double propagated = block.created_at;
        for (double a : block.arrivals) propagated = std::max(propagated, a);
        std::vector<std::string> fields;
        if (replication) fields.push_back(blocktime::format_int(*replication));
        fields.push_back(blocktime::format_int(block.block_id));
        fields.push_back(blocktime::format_int(block.height));
        fields.push_back(blocktime::format_int(block.miner_id));
        fields.push_back(blocktime::format_int(block.parent_id));
        fields.push_back(blocktime::format_double(block.created_at));
        fields.push_back(blocktime::format_double(propagated));
        csv.row(fields);
    }
}

void write_sim_forks(std::ostream& out, const blocktime::SimOutput& output,
                     std::optional<int> replication = std::nullopt) {
    blocktime::CsvWriter csv(out);
    std::vector<std::string> header{"height",          "duration",        "n_branches",
                                    "first_block_time", "last_competitor_time",
                                    "resolution_time",  "winning_block_id"};
    if (replication) header.insert(header.begin(), "replication");
    csv.row(header);
    for (const auto& fork : output.forks) {
        std::vector<std::string> fields;
        if (replication) fields.push_back(blocktime::format_int(*replication));
        fields.push_back(blocktime::format_int(fork.height));
        fields.push_back(blocktime::format_double(fork.duration));
        fields.push_back(blocktime::format_int(fork.n_branches));
        fields.push_back(blocktime::format_double(fork.first_block_time));
        fields.push_back(blocktime::format_double(fork.last_competitor_time));
        fields.push_back(blocktime::format_double(fork.resolution_time));
        fields.push_back(blocktime::format_int(fork.winning_block_id));
        csv.row(fields);
    }
}

void write_sim_retargets(std::ostream& out, const blocktime::SimOutput& output,
                         std::optional<int> replication = std::nullopt) {
    blocktime::CsvWriter csv(out);
    std::vector<std::string> header{"epoch_index", "observed_duration_s", "old_difficulty",
                                    "new_difficulty", "clamped"};
    if (replication) header.insert(header.begin(), "replication");
    csv.row(header);
    for (const auto& rt : output.retargets) {
        std::vector<std::string> fields;
        if (replication) fields.push_back(blocktime::format_int(*replication));
        fields.push_back(blocktime::format_int(rt.epoch_index));
        fields.push_back(blocktime::format_double(rt.observed_duration));
        fields.push_back(blocktime::format_double(rt.old_difficulty.value));
        fields.push_back(blocktime::format_double(rt.new_difficulty.value));
        fields.push_back(rt.clamped ? "1" : "0");
        csv.row(fields);
    }
}

struct SimulateArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> replications;
};

int run_simulate(const SimulateArgs& args) {
    blocktime::CampaignSpec spec;
    {
        std::ifstream config = open_input(args.config_path);
        spec = blocktime::parse_campaign(config);
    }
    if (args.seed) spec.sim.seed = *args.seed;
    if (args.replications) {
        if (*args.replications < 1) {
            throw blocktime::ConfigError("replications", "must be at least 1");
        }
        spec.replications = *args.replications;
    }
    if (!args.out_dir.empty()) spec.output_dir = args.out_dir;
    if (spec.output_dir.empty()) {
        throw blocktime::ConfigError("output_dir", "missing: pass --out or set output_dir");
    }
    spec.sim.validate();

    const fs::path out_root(spec.output_dir);
    fs::create_directories(out_root);

    // One replication per derived seed, run concurrently, merged in
    // replication order so output never depends on scheduling.
    std::vector<std::future<blocktime::SimOutput>> futures;
    futures.reserve(static_cast<std::size_t>(spec.replications));
    for (int rep = 0; rep < spec.replications; ++rep) {
        blocktime::SimConfig config = spec.sim;
        config.seed = blocktime::derive_seed(spec.sim.seed, static_cast<std::uint64_t>(rep));
        futures.push_back(
            std::async(std::launch::async, [config]() { return blocktime::run(config); }));
    }

    const ObserverClock clock{spec.sim.observer, spec.sim.observer_node};
    std::ostringstream merged_intervals, merged_blocks, merged_forks, merged_retargets;
    bool merged_header = false;

    for (int rep = 0; rep < spec.replications; ++rep) {
        const blocktime::SimOutput output = futures[static_cast<std::size_t>(rep)].get();

        char rep_name[16];
        std::snprintf(rep_name, sizeof(rep_name), "rep%03d", rep);
        const fs::path rep_dir = out_root / rep_name;
        fs::create_directories(rep_dir);

        const auto write_file = [&](const char* name, auto&& writer) {
            const fs::path path = rep_dir / name;
            std::ofstream out = open_output(path);
            writer(out);
            finish_output(out, path);
        };
        write_file("arrivals.csv", [&](std::ostream& o) { write_sim_arrivals(o, output, clock); });
        write_file("intervals.csv", [&](std::ostream& o) { write_sim_intervals(o, output); });
        write_file("blocks.csv", [&](std::ostream& o) { write_sim_blocks(o, output); });
        write_file("forks.csv", [&](std::ostream& o) { write_sim_forks(o, output); });
        write_file("retargets.csv", [&](std::ostream& o) { write_sim_retargets(o, output); });

        // Merged variants carry a leading replication column; headers once.
        if (!merged_header) {
            merged_header = true;
            write_sim_intervals(merged_intervals, output, rep);
            write_sim_blocks(merged_blocks, output, rep);
            write_sim_forks(merged_forks, output, rep);
            write_sim_retargets(merged_retargets, output, rep);
        } else {
            std::ostringstream tmp_i, tmp_b, tmp_f, tmp_r;
            write_sim_intervals(tmp_i, output, rep);
            write_sim_blocks(tmp_b, output, rep);
            write_sim_forks(tmp_f, output, rep);
            write_sim_retargets(tmp_r, output, rep);
            const auto append_without_header = [](std::ostringstream& dst,
                                                  const std::ostringstream& src) {
                const std::string text = src.str();
                const std::size_t newline = text.find('\n');
                dst << text.substr(newline + 1);
            };
            append_without_header(merged_intervals, tmp_i);
            append_without_header(merged_blocks, tmp_b);
            append_without_header(merged_forks, tmp_f);
            append_without_header(merged_retargets, tmp_r);
        }
    }

    const auto write_merged = [&](const char* name, const std::ostringstream& text) {
        const fs::path path = out_root / name;
        std::ofstream out = open_output(path);
        out << text.str();
        finish_output(out, path);
    };
    write_merged("merged_intervals.csv", merged_intervals);
    write_merged("merged_blocks.csv", merged_blocks);
    write_merged("merged_forks.csv", merged_forks);
    write_merged("merged_retargets.csv", merged_retargets);

    {
        const fs::path manifest_path = out_root / "manifest.txt";
        std::ofstream manifest = open_output(manifest_path);
        manifest << "config_hash=" << blocktime::config_hash(spec) << '\n';
        manifest << "seed=" << blocktime::format_int(static_cast<std::int64_t>(spec.sim.seed))
                 << '\n';
        manifest << "replications=" << spec.replications << '\n';
        finish_output(manifest, manifest_path);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze

blocktime::IntervalSeries read_intervals_csv(std::istream& in) {
    const blocktime::CsvTable table = blocktime::read_csv(in);
    const std::size_t col = table.column("interval_s");
    if (col == blocktime::CsvTable::npos) {
        throw blocktime::ParseError(1, "missing column interval_s");
    }
    blocktime::IntervalSeries series;
    series.origin = blocktime::SeriesOrigin::ingested;
    series.values.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        double v = 0.0;
        if (!blocktime::parse_double(table.rows[i][col], v)) {
            throw blocktime::ParseError(table.row_lines[i], "non-numeric interval");
        }
        series.values.push_back(v);
    }
    return series;
}

std::vector<blocktime::RetargetEvent> read_retargets_csv(std::istream& in) {
    const blocktime::CsvTable table = blocktime::read_csv(in);
    const std::size_t idx_col = table.column("epoch_index");
    const std::size_t old_col = table.column("old_difficulty");
    if (idx_col == blocktime::CsvTable::npos || old_col == blocktime::CsvTable::npos) {
        throw blocktime::ParseError(1, "missing epoch_index/old_difficulty columns");
    }
    std::vector<blocktime::RetargetEvent> events;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        blocktime::RetargetEvent event;
        double old_diff = 0.0;
        if (!blocktime::parse_int(table.rows[i][idx_col], event.epoch_index) ||
            !blocktime::parse_double(table.rows[i][old_col], old_diff)) {
            throw blocktime::ParseError(table.row_lines[i], "malformed retarget row");
        }
        event.old_difficulty = blocktime::Difficulty(old_diff);
        events.push_back(event);
    }
    return events;
}

struct AnalyzeArgs {
    std::string config_path;
    std::string arrivals_path;
    std::string intervals_path;
    std::string forks_path;
    std::string retargets_path;
    std::string out_dir;
    std::string analyses_flag;
    std::string entropy_rate = "global";
    blocktime::AnalysisOptions opts;
    bool max_lag_set = false, trim_set = false, trunc_set = false, hist_bin_set = false,
         entropy_bin_set = false, segments_set = false;
    bool strict = false;
};

int run_analyze(const AnalyzeArgs& args) {
    blocktime::AnalysisOptions opts;
    std::vector<std::string> analyses;
    if (!args.config_path.empty()) {
        std::ifstream config = open_input(args.config_path);
        const blocktime::CampaignSpec spec = blocktime::parse_campaign(config);
        opts = spec.analysis;
        analyses = spec.analyses;
    }
    if (args.max_lag_set) opts.max_lag = args.opts.max_lag;
    if (args.trim_set) opts.trim_pct = args.opts.trim_pct;
    if (args.trunc_set) opts.hist_trunc_s = args.opts.hist_trunc_s;
    if (args.hist_bin_set) opts.hist_bin_s = args.opts.hist_bin_s;
    if (args.entropy_bin_set) opts.entropy_bin = args.opts.entropy_bin;
    if (args.segments_set) opts.segments = args.opts.segments;
    if (!args.analyses_flag.empty()) {
        analyses.clear();
        std::istringstream list(args.analyses_flag);
        std::string name;
        while (std::getline(list, name, ',')) {
            if (!name.empty()) analyses.push_back(name);
        }
    }
    if (analyses.empty()) {
        throw blocktime::ConfigError("analyses", "nothing selected: pass --analyses");
    }
    for (const auto& name : analyses) {
        if (name != "hist" && name != "acf" && name != "epochs" && name != "halfsplit" &&
            name != "entropy" && name != "forks" && name != "survival") {
            throw blocktime::ConfigError("analyses", "unknown analysis '" + name + "'");
        }
    }
    if (args.out_dir.empty()) throw blocktime::ConfigError("out", "missing output directory");
    if (args.entropy_rate != "global" && args.entropy_rate != "per-epoch") {
        throw blocktime::ConfigError("entropy-rate", "expected global or per-epoch");
    }

    // Inputs, loaded once, only if some analysis needs them.
    std::optional<blocktime::ArrivalDataset> arrivals;
    std::optional<blocktime::IntervalSeries> series;
    std::optional<blocktime::ForkDataset> forks;
    std::vector<blocktime::RetargetEvent> retargets;

    const auto need_series = [&]() -> const blocktime::IntervalSeries& {
        if (series) return *series;
        if (!args.intervals_path.empty()) {
            std::ifstream in = open_input(args.intervals_path);
            series = read_intervals_csv(in);
            return *series;
        }
        if (!args.arrivals_path.empty()) {
            std::ifstream in = open_input(args.arrivals_path);
            std::vector<blocktime::Diagnostic> diags;
            arrivals = blocktime::parse_arrivals(in, {}, diags, args.strict);
            print_diagnostics(diags);
            series = blocktime::to_intervals(*arrivals).series;
            return *series;
        }
        throw blocktime::ConfigError("intervals", "analysis needs --intervals or --arrivals");
    };
    const auto need_arrivals = [&]() -> const blocktime::ArrivalDataset& {
        if (arrivals) return *arrivals;
        if (args.arrivals_path.empty()) {
            throw blocktime::ConfigError("arrivals", "analysis needs --arrivals");
        }
        std::ifstream in = open_input(args.arrivals_path);
        std::vector<blocktime::Diagnostic> diags;
        arrivals = blocktime::parse_arrivals(in, {}, diags, args.strict);
        print_diagnostics(diags);
        return *arrivals;
    };
    const auto need_forks = [&]() -> const blocktime::ForkDataset& {
        if (forks) return *forks;
        if (args.forks_path.empty()) throw blocktime::ConfigError("forks", "analysis needs --forks");
        std::ifstream in = open_input(args.forks_path);
        std::vector<blocktime::Diagnostic> diags;
        forks = blocktime::parse_forks(in, {}, diags, args.strict);
        print_diagnostics(diags);
        if (forks->rows.empty()) throw blocktime::DegenerateInputError("fork dataset is empty");
        return *forks;
    };
    if (!args.retargets_path.empty()) {
        std::ifstream in = open_input(args.retargets_path);
        retargets = read_retargets_csv(in);
    }

    const fs::path out_root(args.out_dir);
    fs::create_directories(out_root);
    const auto write_file = [&](const char* name, auto&& writer) {
        const fs::path path = out_root / name;
        std::ofstream out = open_output(path);
        writer(out);
        finish_output(out, path);
    };

    for (const auto& name : analyses) {
        if (name == "hist") {
            const auto hist =
                blocktime::interval_histogram(need_series(), opts.hist_trunc_s, opts.hist_bin_s);
            write_file("hist.csv",
                       [&](std::ostream& o) { blocktime::write_interval_histogram_csv(o, hist); });
        } else if (name == "acf") {
            const auto acf = blocktime::trimmed_acf(need_series(), opts.trim_pct, opts.max_lag);
            write_file("acf.csv", [&](std::ostream& o) { blocktime::write_acf_csv(o, acf); });
        } else if (name == "epochs" || name == "halfsplit") {
            const auto grouping = blocktime::to_epochs(need_arrivals(), blocktime::EpochPolicy{});
            if (name == "epochs") {
                const auto table = blocktime::epoch_table(grouping.epochs, retargets);
                write_file("epochs.csv",
                           [&](std::ostream& o) { blocktime::write_epoch_table_csv(o, table); });
            } else {
                if (grouping.epochs.size() < 2) {
                    throw blocktime::DegenerateInputError(
                        "half-split needs at least 2 complete epochs");
                }
                const auto result = blocktime::half_split_analysis(grouping.epochs);
                write_file("halfsplit.csv",
                           [&](std::ostream& o) { blocktime::write_halfsplit_csv(o, result); });
            }
        } else if (name == "entropy") {
            blocktime::EntropyHistogram hist;
            if (args.entropy_rate == "per-epoch") {
                const auto grouping =
                    blocktime::to_epochs(need_arrivals(), blocktime::EpochPolicy{});
                hist = blocktime::entropy_histogram_per_epoch(grouping.epochs, opts.entropy_bin);
            } else {
                hist = blocktime::entropy_histogram(need_series(), opts.entropy_bin);
            }
            write_file("entropy_hist.csv",
                       [&](std::ostream& o) { blocktime::write_entropy_histogram_csv(o, hist); });
        } else if (name == "forks" || name == "survival") {
            const auto& dataset = need_forks();
            std::vector<double> durations;
            durations.reserve(dataset.rows.size());
            for (const auto& row : dataset.rows) durations.push_back(row.duration);
            if (name == "forks") {
                write_file("forks_summary.csv", [&](std::ostream& o) {
                    blocktime::write_fork_summary_csv(o, durations, opts.segments);
                });
            } else {
                const auto survival = blocktime::fork_survival(durations, opts.segments);
                write_file("survival.csv", [&](std::ostream& o) {
                    blocktime::write_survival_csv(o, survival.overall);
                });
                write_file("survival_segments.csv", [&](std::ostream& o) {
                    blocktime::write_survival_segments_csv(o, survival);
                });
            }
        }
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report

int run_report(const std::string& dir) {
    const fs::path root(dir);
    const fs::path manifest_path = root / "manifest.txt";
    if (!fs::exists(manifest_path)) {
        std::cerr << "report: no manifest.txt in " << dir << '\n';
        return kExitUsage;
    }
    std::string config_hash = "n/a", seed = "n/a", replications = "n/a";
    {
        std::ifstream manifest = open_input(manifest_path);
        std::string line;
        while (std::getline(manifest, line)) {
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(0, eq);
            const std::string value = line.substr(eq + 1);
            if (key == "config_hash") config_hash = value;
            if (key == "seed") seed = value;
            if (key == "replications") replications = value;
        }
    }

    std::string mean_interval = "n/a", implied_rate = "n/a";
    if (fs::exists(root / "merged_intervals.csv")) {
        std::ifstream in = open_input(root / "merged_intervals.csv");
        const blocktime::IntervalSeries series = read_intervals_csv(in);
        if (!series.values.empty()) {
            const double mean = blocktime::sample_mean(series);
            mean_interval = blocktime::format_double(mean);
            implied_rate = blocktime::format_double(1.0 / mean);
        }
    }

    std::string n_epochs = "n/a";
    if (fs::exists(root / "epochs.csv")) {
        std::ifstream in = open_input(root / "epochs.csv");
        n_epochs = blocktime::format_int(
            static_cast<std::int64_t>(blocktime::read_csv(in).rows.size()));
    }

    std::string halfsplit_p = "n/a";
    if (fs::exists(root / "halfsplit.csv")) {
        std::ifstream in = open_input(root / "halfsplit.csv");
        const blocktime::CsvTable table = blocktime::read_csv(in);
        const std::size_t col = table.column("p_value");
        if (col != blocktime::CsvTable::npos && !table.rows.empty()) {
            halfsplit_p = table.rows[0][col];
        }
    }

    std::string n_forks = "n/a", max_fork = "n/a";
    if (fs::exists(root / "merged_forks.csv")) {
        std::ifstream in = open_input(root / "merged_forks.csv");
        const blocktime::CsvTable table = blocktime::read_csv(in);
        const std::size_t col = table.column("duration");
        n_forks = blocktime::format_int(static_cast<std::int64_t>(table.rows.size()));
        if (col != blocktime::CsvTable::npos) {
            double max_duration = 0.0;
            bool any = false;
            for (const auto& row : table.rows) {
                double v = 0.0;
                if (blocktime::parse_double(row[col], v)) {
                    max_duration = std::max(max_duration, v);
                    any = true;
                }
            }
            if (any) max_fork = blocktime::format_double(max_duration);
        }
    }

    std::cout << "config_hash=" << config_hash << '\n';
    std::cout << "seed=" << seed << '\n';
    std::cout << "replications=" << replications << '\n';
    std::cout << "mean_interval_s=" << mean_interval << '\n';
    std::cout << "implied_rate_per_s=" << implied_rate << '\n';
    std::cout << "n_epochs=" << n_epochs << '\n';
    std::cout << "halfsplit_p=" << halfsplit_p << '\n';
    std::cout << "n_forks=" << n_forks << '\n';
    std::cout << "max_fork_duration_s=" << max_fork << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"proof-of-work block arrival simulator and statistics toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "run a seeded simulation campaign");
    simulate->add_option("--config", sim_args.config_path, "campaign config file")->required();
    simulate->add_option("--out", sim_args.out_dir, "output directory (overrides output_dir)");
    std::uint64_t seed_flag = 0;
    auto* seed_opt = simulate->add_option("--seed", seed_flag, "override the campaign seed");
    int reps_flag = 0;
    auto* reps_opt =
        simulate->add_option("--replications", reps_flag, "override the replication count");

    AnalyzeArgs an_args;
    auto* analyze = app.add_subcommand("analyze", "compute plot-ready tables from data files");
    analyze->add_option("--config", an_args.config_path, "campaign config (for knobs/analyses)");
    analyze->add_option("--arrivals", an_args.arrivals_path, "height,arrival_time CSV");
    analyze->add_option("--intervals", an_args.intervals_path, "CSV with an interval_s column");
    analyze->add_option("--forks", an_args.forks_path, "height,duration CSV");
    analyze->add_option("--retargets", an_args.retargets_path,
                        "retargets CSV for the epoch difficulty column");
    analyze->add_option("--out", an_args.out_dir, "output directory")->required();
    analyze->add_option("--analyses", an_args.analyses_flag,
                        "comma list: hist,acf,epochs,halfsplit,entropy,forks,survival");
    auto* lag_opt = analyze->add_option("--max-lag", an_args.opts.max_lag, "ACF lags (default 20)");
    auto* trim_opt =
        analyze->add_option("--trim-pct", an_args.opts.trim_pct, "ACF trim percent (default 1)");
    auto* trunc_opt = analyze->add_option("--hist-trunc-s", an_args.opts.hist_trunc_s,
                                          "histogram truncation (default 3000)");
    auto* hbin_opt = analyze->add_option("--hist-bin-s", an_args.opts.hist_bin_s,
                                         "histogram bin width (default 60)");
    auto* ebin_opt = analyze->add_option("--entropy-bin", an_args.opts.entropy_bin,
                                         "entropy bin width (default 0.02)");
    analyze->add_option("--entropy-rate", an_args.entropy_rate,
                        "evaluation rate: global (default) or per-epoch");
    auto* seg_opt = analyze->add_option("--segments", an_args.opts.segments,
                                        "fork segments (default 3)");
    analyze->add_flag("--strict", an_args.strict, "escalate data diagnostics to errors");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "print a fixed-order summary of an output dir");
    report->add_option("dir", report_dir, "directory with a manifest.txt")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            if (*seed_opt) sim_args.seed = seed_flag;
            if (*reps_opt) sim_args.replications = reps_flag;
            return run_simulate(sim_args);
        }
        if (analyze->parsed()) {
            an_args.max_lag_set = static_cast<bool>(*lag_opt);
            an_args.trim_set = static_cast<bool>(*trim_opt);
            an_args.trunc_set = static_cast<bool>(*trunc_opt);
            an_args.hist_bin_set = static_cast<bool>(*hbin_opt);
            an_args.entropy_bin_set = static_cast<bool>(*ebin_opt);
            an_args.segments_set = static_cast<bool>(*seg_opt);
            return run_analyze(an_args);
        }
        if (report->parsed()) {
            return run_report(report_dir);
        }
    } catch (const blocktime::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const blocktime::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const blocktime::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const blocktime::DegenerateInputError& e) {
        std::cerr << "degenerate input: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const std::domain_error& e) {
        std::cerr << "degenerate input: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const std::invalid_argument& e) {
        std::cerr << "degenerate input: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitOk;
}
