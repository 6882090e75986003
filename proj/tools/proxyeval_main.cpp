#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "proxyeval/proxyeval.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace proxyeval;

namespace {

std::string read_file_or_throw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_file_or_throw(const std::string& path, const std::string& content) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw Error("failed writing '" + path + "'");
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

double pct(double fraction) { return fraction * 100.0; }

json rounded(double value) { return round_decimals(value, 9); }

std::vector<std::string> split_csv_flag(const std::string& value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= value.size(); ++i) {
        if (i == value.size() || value[i] == ',') {
            out.push_back(value.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

Vocabulary make_vocab(const std::string& name, bool unknown_as_nochord) {
    if (name != "majmin")
        throw ConfigError("unknown vocabulary '" + name + "' (only 'majmin' exists)");
    return Vocabulary::majmin(unknown_as_nochord);
}

// ---- score -----------------------------------------------------------------

struct ScoreArgs {
    std::string manifest;
    std::string out;
    std::string report;
    std::string vocab = "majmin";
    double hop = 0.1;
    bool unknown_as_nochord = false;
};

void run_score(const ScoreArgs& args) {
    const Vocabulary vocab = make_vocab(args.vocab, args.unknown_as_nochord);
    if (args.hop <= 0.0) throw ConfigError("hop must be positive");
    const FrameSpec spec{args.hop};

    const std::string manifest_text = read_file_or_throw(args.manifest);
    const Dataset ds = load_manifest(args.manifest);
    const std::vector<AccuracyPair> pairs = score_dataset(ds, spec, vocab);
    write_file_or_throw(args.out, format_accuracy_csv(pairs));

    if (!args.report.empty()) {
        // Hash the manifest plus every annotation file, in manifest order.
        std::string combined;
        long file_count = 0;
        {
            json manifest_doc = json::parse(manifest_text);
            const fs::path base = fs::path(args.manifest).parent_path();
            auto add = [&](const std::string& rel) {
                fs::path p(rel);
                combined += fnv1a64_hex(
                    read_file_or_throw((p.is_absolute() ? p : base / p).string()));
                ++file_count;
            };
            for (const auto& song : manifest_doc.at("songs")) {
                if (song.at("gt").is_string()) add(song.at("gt").get<std::string>());
                add(song.at("pseudo").get<std::string>());
                for (const auto& [name, path] : song.at("predictions").items())
                    add(path.get<std::string>());
            }
        }
        json report = report_envelope(
            "score",
            json{{"manifest", args.manifest},
                 {"hop", args.hop},
                 {"vocab", args.vocab},
                 {"unknown_as_nochord", args.unknown_as_nochord},
                 {"out", args.out}},
            json{{"manifest", fnv1a64_hex(manifest_text)},
                 {"annotation_files", fnv1a64_hex(combined)},
                 {"annotation_file_count", file_count}});
        report["pairs"] = static_cast<long>(pairs.size());
        report["systems"] = static_cast<long>(ds.systems.size());
        report["validation_songs"] = static_cast<long>(ds.validation_count());
        report["test_songs"] = static_cast<long>(ds.test_count());
        write_file_or_throw(args.report, dump_json(report));
    }

    std::printf("scored %zu (song, system) pairs: %zu systems, %zu validation + %zu test songs -> %s\n",
                pairs.size(), ds.systems.size(), ds.validation_count(), ds.test_count(),
                args.out.c_str());
}

// ---- fit -------------------------------------------------------------------

struct FitArgs {
    std::string table;
    std::string model;
    std::string quantile_mode = "paper_literal";
    std::string out;
};

void run_fit(const FitArgs& args) {
    const ModelKind kind = model_kind_from_string(args.model);
    const QuantileMode mode = quantile_mode_from_string(args.quantile_mode);
    const std::vector<AccuracyPair> pairs =
        parse_accuracy_csv(read_file_or_throw(args.table));
    const FittedModel model = fit_model(kind, pairs, mode);
    write_file_or_throw(args.out, dump_json(params_to_json(model)));

    if (const auto* s = std::get_if<SParams>(&model.params)) {
        std::printf("fit model s on %ld validation rows (%ld systems x n=%ld): mu=%+.4f sigma=%.4f -> %s\n",
                    s->pool_size, s->n_systems, s->n, s->mu, std::sqrt(s->sigma2),
                    args.out.c_str());
    } else if (const auto* i = std::get_if<IParams>(&model.params)) {
        std::printf("fit model i on %zu systems -> %s\n", i->per_system.size(),
                    args.out.c_str());
        for (const auto& [name, g] : i->per_system)
            std::printf("  %-12s n=%ld mu=%+.4f sigma=%.4f\n", name.c_str(), g.n, g.mu_a,
                        std::sqrt(g.sigma2_a));
    } else {
        const auto& l = std::get<LParams>(model.params);
        std::printf("fit model l on %zu systems -> %s\n", l.per_system.size(),
                    args.out.c_str());
        for (const auto& [name, line] : l.per_system)
            std::printf("  %-12s n=%ld a=%.4f b=%+.4f sigma=%.4f\n", name.c_str(),
                        line.n, line.a, line.b, std::sqrt(line.sigma2_a));
    }
}

// ---- estimate ----------------------------------------------------------------

struct EstimateArgs {
    std::string table;
    std::string params;
    std::string out;
    std::string csv;
    std::string mode;
    double alpha = 0.05;
    bool by_genre = false;
};

struct EstimateRow {
    std::string system;
    std::string genre;
    double center = 0.0;
    double half_width = 0.0;
    long m = 0;
};

void run_estimate(const EstimateArgs& args) {
    const std::string table_text = read_file_or_throw(args.table);
    const std::string params_text = read_file_or_throw(args.params);
    const std::vector<AccuracyPair> pairs = parse_accuracy_csv(table_text);
    const FittedModel model = params_from_json(json::parse(params_text, nullptr, true));
    const QuantileMode mode =
        args.mode.empty() ? model.quantile_mode : quantile_mode_from_string(args.mode);

    // Test rows (no y), grouped by system and, optionally, genre.
    std::map<std::string, std::map<std::string, std::vector<double>>> xs;
    for (const AccuracyPair& p : pairs) {
        if (p.y) continue;
        xs[p.system][args.by_genre ? p.genre : std::string("all")].push_back(p.x);
    }
    if (xs.empty()) throw EmptyTestSet("table has no rows without y");

    std::vector<EstimateRow> rows;
    for (const auto& [system, by_genre] : xs) {
        for (const auto& [genre, values] : by_genre) {
            const IntervalEstimate est =
                predict_mean(model, system, values, args.alpha, mode);
            rows.push_back(
                {system, genre, est.center, est.half_width, static_cast<long>(values.size())});
        }
    }

    json estimates = json::array();
    for (const EstimateRow& row : rows)
        estimates.push_back(json{{"system", row.system},
                                 {"genre", row.genre},
                                 {"center", rounded(row.center)},
                                 {"half_width", rounded(row.half_width)},
                                 {"m", row.m},
                                 {"low_support", row.m < 5}});
    json report = report_envelope(
        "estimate",
        json{{"table", args.table},
             {"params", args.params},
             {"model", to_string(model.kind())},
             {"alpha", args.alpha},
             {"quantile_mode", to_string(mode)},
             {"by_genre", args.by_genre}},
        json{{"table", fnv1a64_hex(table_text)}, {"params", fnv1a64_hex(params_text)}});
    report["estimates"] = std::move(estimates);
    write_file_or_throw(args.out, dump_json(report));

    if (!args.csv.empty()) {
        std::string csv = "system,genre,center,half_width\n";
        char buf[64];
        for (const EstimateRow& row : rows) {
            csv += row.system;
            csv += ',';
            csv += row.genre;
            std::snprintf(buf, sizeof(buf), ",%.6f,%.6f\n", row.center, row.half_width);
            csv += buf;
        }
        write_file_or_throw(args.csv, csv);
    }

    std::printf("estimate (model %s, alpha %.3f, %s)\n", to_string(model.kind()),
                args.alpha, to_string(mode));
    std::printf("  %-12s %-10s %5s %10s %10s\n", "system", "genre", "m", "center", "+/-");
    for (const EstimateRow& row : rows)
        std::printf("  %-12s %-10s %5ld %9.2f%% %9.2f%%%s\n", row.system.c_str(),
                    row.genre.c_str(), row.m, pct(row.center), pct(row.half_width),
                    row.m < 5 ? "  (low support)" : "");
}

// ---- compare -----------------------------------------------------------------

struct CompareArgs {
    std::string table;
    std::string params;
    std::string systems;
    std::string out;
    std::string mode;
    double alpha = 0.05;
};

void run_compare(const CompareArgs& args) {
    const auto names = split_csv_flag(args.systems);
    if (names.size() != 2 || names[0].empty() || names[1].empty())
        throw ConfigError("--systems expects exactly two comma-separated names");

    const std::string table_text = read_file_or_throw(args.table);
    const std::string params_text = read_file_or_throw(args.params);
    const std::vector<AccuracyPair> pairs = parse_accuracy_csv(table_text);
    const FittedModel model = params_from_json(json::parse(params_text, nullptr, true));
    const QuantileMode mode =
        args.mode.empty() ? model.quantile_mode : quantile_mode_from_string(args.mode);

    std::map<std::string, std::vector<double>> xs;
    for (const AccuracyPair& p : pairs)
        if (!p.y) xs[p.system].push_back(p.x);
    for (const auto& name : names)
        if (!xs.count(name))
            throw EmptyTestSet("system '" + name + "' has no test rows in the table");

    const IntervalEstimate est = compare_means(model, names[0], xs[names[0]], names[1],
                                               xs[names[1]], args.alpha, mode);

    json report = report_envelope(
        "compare",
        json{{"table", args.table},
             {"params", args.params},
             {"model", to_string(model.kind())},
             {"systems", args.systems},
             {"alpha", args.alpha},
             {"quantile_mode", to_string(mode)}},
        json{{"table", fnv1a64_hex(table_text)}, {"params", fnv1a64_hex(params_text)}});
    report["comparison"] = json{{"system_a", names[0]},
                                {"system_b", names[1]},
                                {"center", rounded(est.center)},
                                {"half_width", rounded(est.half_width)},
                                {"m_a", static_cast<long>(xs[names[0]].size())},
                                {"m_b", static_cast<long>(xs[names[1]].size())}};
    if (!args.out.empty()) write_file_or_throw(args.out, dump_json(report));

    std::printf("compare (model %s, alpha %.3f, %s)\n", to_string(model.kind()),
                args.alpha, to_string(mode));
    std::printf("  %s - %s: %+.2f%% +/- %.2f%%\n", names[0].c_str(), names[1].c_str(),
                pct(est.center), pct(est.half_width));
}

// ---- consensus ----------------------------------------------------------------

struct ConsensusArgs {
    std::string manifest;
    std::string out_dir;
    std::string priority;
    std::string vocab = "majmin";
    double hop = 0.1;
    bool unknown_as_nochord = false;
    bool force = false;
};

void run_consensus(const ConsensusArgs& args) {
    const Vocabulary vocab = make_vocab(args.vocab, args.unknown_as_nochord);
    if (args.hop <= 0.0) throw ConfigError("hop must be positive");
    const FrameSpec spec{args.hop};

    const Dataset ds = load_manifest(args.manifest);
    VotePolicy policy{ds.systems};
    if (!args.priority.empty()) {
        policy.priority = split_csv_flag(args.priority);
        std::set<std::string> given(policy.priority.begin(), policy.priority.end());
        std::set<std::string> expected(ds.systems.begin(), ds.systems.end());
        if (given != expected || policy.priority.size() != ds.systems.size())
            throw ConfigError("--priority must be a permutation of the manifest systems");
    }

    fs::create_directories(args.out_dir);
    if (!args.force) {
        for (const SongRecord& song : ds.songs) {
            const fs::path target = fs::path(args.out_dir) / (song.song_id + ".lab");
            if (fs::exists(target))
                throw Error("output file '" + target.string() +
                            "' already exists (use --force to overwrite)");
        }
    }

    for (const SongRecord& song : ds.songs) {
        const Annotation consensus =
            consensus_annotation(song.predictions, spec, vocab, policy);
        const fs::path target = fs::path(args.out_dir) / (song.song_id + ".lab");
        write_file_or_throw(target.string(), write_lab(consensus) + "\n");
    }
    std::printf("wrote %zu consensus annotations (%zu systems) -> %s\n", ds.songs.size(),
                ds.systems.size(), args.out_dir.c_str());
}

// ---- simulate -----------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::string out;
    std::string trials_csv;
    long trials = 0;
};

void run_simulate(const SimulateArgs& args) {
    const std::string config_text = read_file_or_throw(args.config);
    json doc;
    try {
        doc = json::parse(config_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("simulation config: ") + e.what());
    }
    const SynthConfig config = synth_config_from_json(doc);
    const double alpha = doc.value("alpha", 0.05);
    const ModelKind fit_kind =
        model_kind_from_string(doc.value("fit_model", std::string(to_string(config.model))));
    const long trials = args.trials > 0 ? args.trials : doc.value("trials", 1000L);

    std::vector<TrialRecord> records;
    const CoverageReport result = run_coverage_experiment(
        config, fit_kind, alpha, trials, args.trials_csv.empty() ? nullptr : &records);

    json report = report_envelope(
        "simulate",
        json{{"config", args.config}, {"trials", trials}, {"alpha", alpha},
             {"fit_model", to_string(fit_kind)}, {"config_echo", doc}},
        json{{"config", fnv1a64_hex(config_text)}});
    json modes = json::object();
    for (const auto& [name, stats] : result.modes)
        modes[name] = json{{"coverage_song", rounded(stats.coverage_song)},
                           {"coverage_mean", rounded(stats.coverage_mean)},
                           {"coverage_diff", rounded(stats.coverage_diff)},
                           {"mean_width_song", rounded(stats.mean_width_song)},
                           {"mean_width_mean", rounded(stats.mean_width_mean)},
                           {"mean_width_diff", rounded(stats.mean_width_diff)}};
    json center_error = json::object();
    for (const auto& [name, err] : result.mean_center_error)
        center_error[name] = rounded(err);
    report["result"] = json{{"trials", result.trials},
                            {"failed_trials", result.failed_trials},
                            {"alpha", result.alpha},
                            {"fit_model", to_string(result.fit_model)},
                            {"clamp_rate", rounded(result.clamp_rate)},
                            {"modes", std::move(modes)},
                            {"mean_center_error", std::move(center_error)}};
    write_file_or_throw(args.out, dump_json(report));
    if (!args.trials_csv.empty())
        write_file_or_throw(args.trials_csv, trial_records_csv(records));

    std::printf("simulate: generator %s, fit %s, alpha %.3f, %ld trials (%ld failed), clamp rate %.4f%%\n",
                to_string(config.model), to_string(fit_kind), alpha, result.trials,
                result.failed_trials, pct(result.clamp_rate));
    std::printf("  %-14s %8s %8s %8s %12s\n", "mode", "song", "mean", "diff",
                "width(mean)");
    for (const auto& [name, stats] : result.modes)
        std::printf("  %-14s %7.2f%% %7.2f%% %7.2f%% %12.5f\n", name.c_str(),
                    pct(stats.coverage_song), pct(stats.coverage_mean),
                    pct(stats.coverage_diff), stats.mean_width_mean);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evaluate timed-label recognition systems against pseudo annotations "
                 "and estimate ground-truth accuracy with confidence intervals"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("proxyeval ") + kVersion);

    ScoreArgs score_args;
    auto* score = app.add_subcommand("score", "Score predictions into an accuracy table");
    score->add_option("--manifest", score_args.manifest, "Corpus manifest JSON")->required();
    score->add_option("--out", score_args.out, "Output accuracy CSV")->required();
    score->add_option("--report", score_args.report, "Optional run-report JSON");
    score->add_option("--hop", score_args.hop, "Frame hop in seconds (default 0.1)");
    score->add_option("--vocab", score_args.vocab, "Label vocabulary (majmin)");
    score->add_flag("--unknown-as-nochord", score_args.unknown_as_nochord,
                    "Treat X labels as NoChord instead of excluding them");
    score->callback([&] { run_score(score_args); });

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Fit a model on the validation rows of a table");
    fit->add_option("--table", fit_args.table, "Accuracy table CSV")->required();
    fit->add_option("--model", fit_args.model, "Model: s, i or l")->required();
    fit->add_option("--quantile-mode", fit_args.quantile_mode,
                    "paper_literal (default) or two_sided");
    fit->add_option("--out", fit_args.out, "Output params JSON")->required();
    fit->callback([&] { run_fit(fit_args); });

    EstimateArgs est_args;
    auto* estimate =
        app.add_subcommand("estimate", "Estimate mean GT accuracy on the test rows");
    estimate->add_option("--table", est_args.table, "Accuracy table CSV")->required();
    estimate->add_option("--params", est_args.params, "Fitted params JSON")->required();
    estimate->add_option("--alpha", est_args.alpha, "Significance level (default 0.05)");
    estimate->add_option("--mode", est_args.mode,
                         "Quantile mode override (paper_literal or two_sided)");
    estimate->add_flag("--by-genre", est_args.by_genre, "Stratify by genre");
    estimate->add_option("--out", est_args.out, "Output report JSON")->required();
    estimate->add_option("--csv", est_args.csv, "Optional plot-ready CSV");
    estimate->callback([&] { run_estimate(est_args); });

    CompareArgs cmp_args;
    auto* compare = app.add_subcommand("compare", "Compare two systems' mean GT accuracy");
    compare->add_option("--table", cmp_args.table, "Accuracy table CSV")->required();
    compare->add_option("--params", cmp_args.params, "Fitted params JSON")->required();
    compare->add_option("--systems", cmp_args.systems, "Two names: A,B (reports A - B)")
        ->required();
    compare->add_option("--alpha", cmp_args.alpha, "Significance level (default 0.05)");
    compare->add_option("--mode", cmp_args.mode,
                        "Quantile mode override (paper_literal or two_sided)");
    compare->add_option("--out", cmp_args.out, "Optional report JSON");
    compare->callback([&] { run_compare(cmp_args); });

    ConsensusArgs cons_args;
    auto* consensus =
        app.add_subcommand("consensus", "Write majority-vote consensus annotations");
    consensus->add_option("--manifest", cons_args.manifest, "Corpus manifest JSON")
        ->required();
    consensus->add_option("--out", cons_args.out_dir, "Output directory for LAB files")
        ->required();
    consensus->add_option("--priority", cons_args.priority,
                          "Tie-break order, comma-separated (default: manifest order)");
    consensus->add_option("--hop", cons_args.hop, "Frame hop in seconds (default 0.1)");
    consensus->add_option("--vocab", cons_args.vocab, "Label vocabulary (majmin)");
    consensus->add_flag("--unknown-as-nochord", cons_args.unknown_as_nochord,
                        "Treat X labels as NoChord instead of excluding them");
    consensus->add_flag("--force", cons_args.force, "Overwrite existing output files");
    consensus->callback([&] { run_consensus(cons_args); });

    SimulateArgs sim_args;
    auto* simulate =
        app.add_subcommand("simulate", "Monte-Carlo interval-calibration experiment");
    simulate->add_option("--config", sim_args.config, "Simulation config JSON")->required();
    simulate->add_option("--trials", sim_args.trials, "Trial count override");
    simulate->add_option("--out", sim_args.out, "Output report JSON")->required();
    simulate->add_option("--trials-csv", sim_args.trials_csv,
                         "Optional per-trial CSV log");
    simulate->callback([&] { run_simulate(sim_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 70;
    }
    return 0;
}
