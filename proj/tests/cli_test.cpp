#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "blocktime/csv.hpp"
#include "blocktime/ingest.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const fs::path& stdout_file = {},
            const fs::path& stderr_file = {}) {
    std::string cmd = std::string(BLOCKTIME_CLI_PATH) + " " + args;
    cmd += stdout_file.empty() ? " > /dev/null" : " > " + stdout_file.string();
    cmd += stderr_file.empty() ? " 2> /dev/null" : " 2> " + stderr_file.string();
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    REQUIRE(out.good());
}

std::size_t csv_rows(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return blocktime::read_csv(in).rows.size();
}

const std::string kMinimalConfig =
    "seed = 9\n"
    "run_length_blocks = 1000\n";

}  // namespace

TEST_CASE("simulate writes the campaign artifacts") {
    const fs::path dir = testsup::scratch_dir("cli_sim");
    write_file(dir / "campaign.cfg", kMinimalConfig);

    const int rc = run_cli("simulate --config " + (dir / "campaign.cfg").string() + " --out " +
                           (dir / "out").string());
    REQUIRE(rc == 0);
    CHECK(csv_rows(dir / "out/rep000/intervals.csv") == 1000);
    CHECK(csv_rows(dir / "out/rep000/arrivals.csv") == 1001);
    CHECK(csv_rows(dir / "out/merged_intervals.csv") == 1000);
    CHECK(fs::exists(dir / "out/rep000/blocks.csv"));
    CHECK(fs::exists(dir / "out/rep000/forks.csv"));
    CHECK(fs::exists(dir / "out/rep000/retargets.csv"));
    CHECK(fs::exists(dir / "out/manifest.txt"));
    const std::string manifest = read_file(dir / "out/manifest.txt");
    CHECK(manifest.find("config_hash=") != std::string::npos);
    CHECK(manifest.find("seed=9") != std::string::npos);
}

TEST_CASE("simulate without a seed exits 2 and names the field") {
    const fs::path dir = testsup::scratch_dir("cli_noseed");
    write_file(dir / "campaign.cfg", "run_length_blocks = 10\n");
    const int rc = run_cli("simulate --config " + (dir / "campaign.cfg").string() + " --out " +
                               (dir / "out").string(),
                           {}, dir / "stderr.txt");
    CHECK(rc == 2);
    CHECK(read_file(dir / "stderr.txt").find("seed") != std::string::npos);
}

TEST_CASE("simulate is byte-deterministic") {
    const fs::path dir = testsup::scratch_dir("cli_det");
    write_file(dir / "campaign.cfg", kMinimalConfig);
    const std::string config = (dir / "campaign.cfg").string();
    REQUIRE(run_cli("simulate --config " + config + " --out " + (dir / "a").string()) == 0);
    REQUIRE(run_cli("simulate --config " + config + " --out " + (dir / "b").string()) == 0);
    CHECK(read_file(dir / "a/merged_intervals.csv") == read_file(dir / "b/merged_intervals.csv"));
    CHECK(read_file(dir / "a/rep000/arrivals.csv") == read_file(dir / "b/rep000/arrivals.csv"));
    CHECK(read_file(dir / "a/manifest.txt") == read_file(dir / "b/manifest.txt"));
}

TEST_CASE("replications fan out into numbered directories") {
    const fs::path dir = testsup::scratch_dir("cli_reps");
    write_file(dir / "campaign.cfg", "seed = 5\nrun_length_blocks = 50\nreplications = 3\n");
    REQUIRE(run_cli("simulate --config " + (dir / "campaign.cfg").string() + " --out " +
                    (dir / "out").string()) == 0);
    CHECK(fs::exists(dir / "out/rep000/intervals.csv"));
    CHECK(fs::exists(dir / "out/rep002/intervals.csv"));
    CHECK(csv_rows(dir / "out/merged_intervals.csv") == 150);

    // Replications draw distinct seeds.
    CHECK(read_file(dir / "out/rep000/intervals.csv") !=
          read_file(dir / "out/rep001/intervals.csv"));
}

TEST_CASE("analyze produces the figure tables from simulated data") {
    const fs::path dir = testsup::scratch_dir("cli_analyze");
    write_file(dir / "campaign.cfg", "seed = 11\nrun_length_blocks = 5000\n");
    REQUIRE(run_cli("simulate --config " + (dir / "campaign.cfg").string() + " --out " +
                    (dir / "out").string()) == 0);

    const int rc = run_cli("analyze --arrivals " + (dir / "out/rep000/arrivals.csv").string() +
                           " --retargets " + (dir / "out/rep000/retargets.csv").string() +
                           " --analyses hist,acf,entropy,epochs,halfsplit --out " +
                           (dir / "out").string());
    REQUIRE(rc == 0);

    // 5000 blocks span two complete 2016-interval epochs.
    CHECK(csv_rows(dir / "out/epochs.csv") == 2);
    CHECK(csv_rows(dir / "out/halfsplit.csv") == 1);
    {
        std::ifstream in(dir / "out/epochs.csv");
        const blocktime::CsvTable epochs = blocktime::read_csv(in);
        const std::size_t col = epochs.column("difficulty");
        REQUIRE(col != blocktime::CsvTable::npos);
        CHECK(epochs.rows[0][col] == "1");  // joined from retargets.csv
    }

    // Histogram density integrates to 1 over the bins.
    std::ifstream hist_in(dir / "out/hist.csv");
    const blocktime::CsvTable hist = blocktime::read_csv(hist_in);
    const std::size_t left = hist.column("bin_left");
    const std::size_t right = hist.column("bin_right");
    const std::size_t density = hist.column("density");
    REQUIRE(left != blocktime::CsvTable::npos);
    double integral = 0.0;
    for (const auto& row : hist.rows) {
        double l = 0, r = 0, d = 0;
        REQUIRE(blocktime::parse_double(row[left], l));
        REQUIRE(blocktime::parse_double(row[right], r));
        REQUIRE(blocktime::parse_double(row[density], d));
        integral += d * (r - l);
    }
    CHECK(integral > 1.0 - 1e-6);
    CHECK(integral < 1.0 + 1e-6);

    CHECK(csv_rows(dir / "out/acf.csv") == 20);
    CHECK(csv_rows(dir / "out/entropy_hist.csv") == 50);
}

TEST_CASE("survival analysis reproduces the counting fixture") {
    const fs::path dir = testsup::scratch_dir("cli_survival");
    write_file(dir / "forks.csv", "height,duration\n100,1\n200,2\n300,2\n400,5\n");
    const int rc = run_cli("analyze --forks " + (dir / "forks.csv").string() +
                           " --analyses survival,forks --segments 1 --out " + dir.string());
    REQUIRE(rc == 0);

    std::ifstream in(dir / "survival.csv");
    const blocktime::CsvTable table = blocktime::read_csv(in);
    bool found = false;
    for (const auto& row : table.rows) {
        if (row[0] == "2") {
            CHECK(row[1] == "0.75");
            found = true;
        }
    }
    CHECK(found);
    CHECK(fs::exists(dir / "forks_summary.csv"));
    CHECK(fs::exists(dir / "survival_segments.csv"));
}

TEST_CASE("emitted datasets re-ingest cleanly") {
    const fs::path dir = testsup::scratch_dir("cli_roundtrip");
    write_file(dir / "campaign.cfg", "seed = 33\nrun_length_blocks = 400\nminers = 0.5, 0.5\n"
                                     "delay_model = fixed(10)\n");
    REQUIRE(run_cli("simulate --config " + (dir / "campaign.cfg").string() + " --out " +
                    (dir / "out").string()) == 0);

    // arrivals.csv round-trips byte for byte through the parser/serializer.
    std::ifstream arrivals_in(dir / "out/rep000/arrivals.csv");
    std::vector<blocktime::Diagnostic> diags;
    const blocktime::ArrivalDataset dataset = blocktime::parse_arrivals(arrivals_in, {}, diags);
    CHECK(diags.empty());
    std::ostringstream rewritten;
    blocktime::write_arrivals(rewritten, dataset);
    CHECK(rewritten.str() == read_file(dir / "out/rep000/arrivals.csv"));

    // forks.csv parses through the fork ingest path (extra columns ignored).
    std::ifstream forks_in(dir / "out/rep000/forks.csv");
    const blocktime::ForkDataset forks = blocktime::parse_forks(forks_in, {}, diags);
    std::ifstream forks_again(dir / "out/rep000/forks.csv");
    CHECK(forks.rows.size() == blocktime::read_csv(forks_again).rows.size());
}

TEST_CASE("unwritable output directories exit 3") {
    const fs::path dir = testsup::scratch_dir("cli_io");
    write_file(dir / "campaign.cfg", kMinimalConfig);
    write_file(dir / "blocker", "");
    const int rc = run_cli("simulate --config " + (dir / "campaign.cfg").string() + " --out " +
                           (dir / "blocker" / "nested").string());
    CHECK(rc == 3);
}

TEST_CASE("missing subcommand exits 2") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
}

TEST_CASE("unknown analysis names exit 2") {
    const fs::path dir = testsup::scratch_dir("cli_unknown");
    write_file(dir / "intervals.csv", "height,interval_s\n1,600\n");
    const int rc = run_cli("analyze --intervals " + (dir / "intervals.csv").string() +
                           " --analyses sprockets --out " + dir.string());
    CHECK(rc == 2);
}

TEST_CASE("empty and constant inputs exit 4") {
    const fs::path dir = testsup::scratch_dir("cli_degenerate");
    write_file(dir / "empty.csv", "height,interval_s\n");
    CHECK(run_cli("analyze --intervals " + (dir / "empty.csv").string() +
                  " --analyses hist --out " + dir.string()) == 4);

    std::string constant = "height,interval_s\n";
    for (int i = 1; i <= 50; ++i) constant += std::to_string(i) + ",600\n";
    write_file(dir / "constant.csv", constant);
    CHECK(run_cli("analyze --intervals " + (dir / "constant.csv").string() +
                  " --analyses acf --out " + dir.string()) == 4);
}

TEST_CASE("report prints the fixed-order summary") {
    const fs::path dir = testsup::scratch_dir("cli_report");
    write_file(dir / "campaign.cfg", "seed = 21\nrun_length_blocks = 500\n");
    REQUIRE(run_cli("simulate --config " + (dir / "campaign.cfg").string() + " --out " +
                    (dir / "out").string()) == 0);
    REQUIRE(run_cli("analyze --arrivals " + (dir / "out/rep000/arrivals.csv").string() +
                    " --analyses hist --out " + (dir / "out").string()) == 0);

    REQUIRE(run_cli("report " + (dir / "out").string(), dir / "report1.txt") == 0);
    const std::string report = read_file(dir / "report1.txt");
    CHECK(report.find("mean_interval_s=") != std::string::npos);
    CHECK(report.find("implied_rate_per_s=") != std::string::npos);
    CHECK(report.find("n_forks=") != std::string::npos);
    CHECK(report.find("seed=21") != std::string::npos);

    REQUIRE(run_cli("report " + (dir / "out").string(), dir / "report2.txt") == 0);
    CHECK(read_file(dir / "report1.txt") == read_file(dir / "report2.txt"));

    const fs::path empty = testsup::scratch_dir("cli_report_empty");
    CHECK(run_cli("report " + empty.string()) == 2);
}
