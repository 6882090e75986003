#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "proxyeval/annotation.hpp"
#include "proxyeval/scoring.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli() { return PROXYEVAL_CLI_PATH; }
std::string data_dir() { return PROXYEVAL_DATA_DIR; }
std::string golden_dir() { return PROXYEVAL_GOLDEN_DIR; }

fs::path make_temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("proxyeval_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

int run(const std::string& command, const fs::path& dir) {
    const std::string full = command + " > " + (dir / "stdout.txt").string() + " 2> " +
                             (dir / "stderr.txt").string();
    const int status = std::system(full.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("version and help", "[cli]") {
    const fs::path dir = make_temp_dir("version");
    REQUIRE(run(cli() + " --version", dir) == 0);
    REQUIRE(read_file(dir / "stdout.txt").rfind("proxyeval ", 0) == 0);
    REQUIRE(run(cli() + " --help", dir) == 0);
    REQUIRE(run(cli() + " score --help", dir) == 0);
}

TEST_CASE("usage errors exit 3", "[cli]") {
    const fs::path dir = make_temp_dir("usage");
    REQUIRE(run(cli() + " score --nope", dir) == 3);
    REQUIRE(run(cli() + " score", dir) == 3);
    REQUIRE(run(cli() + " frobnicate", dir) == 3);
    REQUIRE(run(cli(), dir) == 3);
}

TEST_CASE("score matches the golden table", "[cli]") {
    const fs::path dir = make_temp_dir("score");
    const std::string manifest = data_dir() + std::string("/fixture3/manifest.json");
    const fs::path table = dir / "scores.csv";
    const fs::path report_path = dir / "report.json";

    REQUIRE(run(cli() + " score --manifest " + manifest + " --out " + table.string() +
                    " --report " + report_path.string(),
                dir) == 0);
    REQUIRE(read_file(table) ==
            read_file(golden_dir() + std::string("/fixture3_scores.csv")));

    const json report = json::parse(read_file(report_path));
    REQUIRE(report.at("tool") == "proxyeval");
    REQUIRE(report.at("command") == "score");
    REQUIRE(report.at("pairs") == 6);
    REQUIRE(report.at("systems") == 2);
    REQUIRE(report.at("validation_songs") == 2);
    REQUIRE(report.at("test_songs") == 1);
    REQUIRE(report.at("inputs").at("annotation_file_count") == 11);
    REQUIRE(report.at("config").at("hop") == 0.1);

    SECTION("output does not depend on the thread budget") {
        const fs::path serial = dir / "scores_serial.csv";
        REQUIRE(run("PROXY_EVAL_THREADS=1 " + cli() + " score --manifest " + manifest +
                        " --out " + serial.string(),
                    dir) == 0);
        REQUIRE(read_file(serial) == read_file(table));
    }
    SECTION("a finer hop stays within the boundary-measure bound") {
        const fs::path fine = dir / "scores_hop05.csv";
        REQUIRE(run(cli() + " score --manifest " + manifest + " --hop 0.05 --out " +
                        fine.string(),
                    dir) == 0);
        const auto coarse = proxyeval::parse_accuracy_csv(read_file(table));
        const auto finer = proxyeval::parse_accuracy_csv(read_file(fine));
        REQUIRE(finer.size() == coarse.size());
        for (std::size_t i = 0; i < coarse.size(); ++i) {
            REQUIRE(finer[i].song_id == coarse[i].song_id);
            // Durations are ~10 s with ~4 segments a side, so 0.1 x
            // (segments_pred + segments_ref) / duration stays below 0.12.
            REQUIRE(std::abs(finer[i].x - coarse[i].x) < 0.12);
        }
    }
}

TEST_CASE("data errors exit 2", "[cli]") {
    const fs::path dir = make_temp_dir("dataerr");
    write_file(dir / "pseudo.lab", "0 10 C:maj\n");
    write_file(dir / "bad.json", R"({"systems":["a","b"],"songs":[
        {"id":"s1","genre":"rock","gt":null,"pseudo":"pseudo.lab",
         "predictions":{"a":"pseudo.lab"}}]})");
    REQUIRE(run(cli() + " score --manifest " + (dir / "bad.json").string() + " --out " +
                    (dir / "t.csv").string(),
                dir) == 2);
    REQUIRE(read_file(dir / "stderr.txt").rfind("error:", 0) == 0);

    REQUIRE(run(cli() + " score --manifest " + (dir / "absent.json").string() +
                    " --out " + (dir / "t.csv").string(),
                dir) == 2);
}

TEST_CASE("fit, estimate and compare round trip", "[cli]") {
    const fs::path dir = make_temp_dir("fitflow");
    const std::string manifest = data_dir() + std::string("/fixture3/manifest.json");
    const fs::path table = dir / "scores.csv";
    REQUIRE(run(cli() + " score --manifest " + manifest + " --out " + table.string(),
                dir) == 0);

    SECTION("the line model needs three validation songs") {
        REQUIRE(run(cli() + " fit --table " + table.string() + " --model l --out " +
                        (dir / "l.json").string(),
                    dir) == 2);
    }
    SECTION("offset models fit and drive estimates") {
        const fs::path params = dir / "params_i.json";
        REQUIRE(run(cli() + " fit --table " + table.string() + " --model i --out " +
                        params.string(),
                    dir) == 0);
        const json fitted = json::parse(read_file(params));
        REQUIRE(fitted.at("model") == "i");
        REQUIRE(fitted.at("quantile_mode") == "paper_literal");
        REQUIRE(fitted.at("per_system").at("sysA").at("n") == 2);
        REQUIRE(fitted.at("per_system").at("sysB").at("n") == 2);

        const fs::path est = dir / "estimate.json";
        const fs::path est_csv = dir / "estimate.csv";
        REQUIRE(run(cli() + " estimate --table " + table.string() + " --params " +
                        params.string() + " --out " + est.string() + " --csv " +
                        est_csv.string(),
                    dir) == 0);
        const json est_doc = json::parse(read_file(est));
        REQUIRE(est_doc.at("command") == "estimate");
        REQUIRE(est_doc.at("estimates").size() == 2);
        for (const auto& row : est_doc.at("estimates")) {
            REQUIRE(row.at("genre") == "all");
            REQUIRE(row.at("m") == 1);
            REQUIRE(row.at("low_support") == true);
            const double center = row.at("center").get<double>();
            REQUIRE(center > 0.0);
            REQUIRE(center < 1.5);
            REQUIRE(row.at("half_width").get<double>() > 0.0);
        }
        REQUIRE(read_file(est_csv).rfind("system,genre,center,half_width\n", 0) == 0);

        const fs::path by_genre = dir / "estimate_genre.json";
        REQUIRE(run(cli() + " estimate --table " + table.string() + " --params " +
                        params.string() + " --by-genre --out " + by_genre.string(),
                    dir) == 0);
        // The only test song is rock, so stratifying changes labels, not values.
        const json genre_rows = json::parse(read_file(by_genre)).at("estimates");
        REQUIRE(genre_rows.size() == est_doc.at("estimates").size());
        for (std::size_t i = 0; i < genre_rows.size(); ++i) {
            REQUIRE(genre_rows[i].at("genre") == "rock");
            REQUIRE(genre_rows[i].at("center") ==
                    est_doc.at("estimates")[i].at("center"));
            REQUIRE(genre_rows[i].at("half_width") ==
                    est_doc.at("estimates")[i].at("half_width"));
        }

        const fs::path cmp = dir / "compare.json";
        REQUIRE(run(cli() + " compare --table " + table.string() + " --params " +
                        params.string() + " --systems sysA,sysB --out " + cmp.string(),
                    dir) == 0);
        const json cmp_doc = json::parse(read_file(cmp)).at("comparison");
        REQUIRE(cmp_doc.at("system_a") == "sysA");
        REQUIRE(cmp_doc.at("system_b") == "sysB");
        REQUIRE(cmp_doc.at("m_a") == 1);
        REQUIRE(cmp_doc.at("m_b") == 1);
        REQUIRE(cmp_doc.at("half_width").get<double>() > 0.0);

        REQUIRE(run(cli() + " compare --table " + table.string() + " --params " +
                        params.string() + " --systems sysA --out " +
                        (dir / "x.json").string(),
                    dir) == 2);
        REQUIRE(run(cli() + " estimate --table " + table.string() + " --params " +
                        params.string() + " --alpha 2 --out " +
                        (dir / "y.json").string(),
                    dir) == 2);
    }
}

TEST_CASE("consensus writes one annotation per song", "[cli]") {
    const fs::path dir = make_temp_dir("consensus");
    const std::string manifest = data_dir() + std::string("/fixture3/manifest.json");
    const fs::path out = dir / "labs";

    REQUIRE(run(cli() + " consensus --manifest " + manifest + " --out " + out.string(),
                dir) == 0);
    for (const char* song : {"song-a", "song-b", "song-c"}) {
        const std::string text = read_file(out / (std::string(song) + ".lab"));
        REQUIRE(!text.empty());
        REQUIRE(text.back() == '\n');
        REQUIRE(!proxyeval::parse_lab(text).empty());
    }

    SECTION("existing outputs are refused without --force") {
        REQUIRE(run(cli() + " consensus --manifest " + manifest + " --out " +
                        out.string(),
                    dir) == 2);
        REQUIRE(run(cli() + " consensus --manifest " + manifest + " --out " +
                        out.string() + " --force",
                    dir) == 0);
    }
    SECTION("priority must be a permutation of the manifest systems") {
        REQUIRE(run(cli() + " consensus --manifest " + manifest + " --out " +
                        (dir / "labs2").string() + " --priority sysB,sysA",
                    dir) == 0);
        REQUIRE(run(cli() + " consensus --manifest " + manifest + " --out " +
                        (dir / "labs3").string() + " --priority sysB",
                    dir) == 2);
    }
}

TEST_CASE("simulate writes a calibration report", "[cli]") {
    const fs::path dir = make_temp_dir("simulate");
    const fs::path config = dir / "config.json";
    write_file(config, R"({
  "model": "i",
  "n_validation": 12,
  "n_test": 5,
  "x_lo": 0.3,
  "x_hi": 0.7,
  "seed": 7,
  "sigma": 0.03,
  "systems": ["alpha", "beta"],
  "trials": 40,
  "alpha": 0.05
})");
    const fs::path out = dir / "sim.json";
    const fs::path trials_csv = dir / "trials.csv";
    REQUIRE(run(cli() + " simulate --config " + config.string() + " --out " +
                    out.string() + " --trials-csv " + trials_csv.string(),
                dir) == 0);

    const json report = json::parse(read_file(out));
    REQUIRE(report.at("command") == "simulate");
    const json& result = report.at("result");
    REQUIRE(result.at("trials") == 40);
    REQUIRE(result.at("failed_trials") == 0);
    REQUIRE(result.at("fit_model") == "i");
    REQUIRE(result.at("modes").contains("paper_literal"));
    REQUIRE(result.at("modes").contains("two_sided"));
    const double coverage =
        result.at("modes").at("two_sided").at("coverage_song").get<double>();
    REQUIRE(coverage > 0.8);
    REQUIRE(coverage <= 1.0);
    REQUIRE(read_file(trials_csv).rfind(
                "trial,mode,system,center,half_width,true_mean,covered\n", 0) == 0);

    SECTION("the trial override wins over the config") {
        REQUIRE(run(cli() + " simulate --config " + config.string() + " --trials 10" +
                        " --out " + out.string(),
                    dir) == 0);
        REQUIRE(json::parse(read_file(out)).at("result").at("trials") == 10);
    }
    SECTION("bad config exits 2") {
        write_file(dir / "bad.json", "{\"n_validation\": 1}");
        REQUIRE(run(cli() + " simulate --config " + (dir / "bad.json").string() +
                        " --out " + out.string(),
                    dir) == 2);
    }
}
