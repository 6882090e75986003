#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "proxyeval/errors.hpp"
#include "proxyeval/estimators.hpp"
#include "proxyeval/parallel.hpp"
#include "proxyeval/rng.hpp"
#include "proxyeval/scoring.hpp"

namespace proxyeval {

/// Generator parameters for one synthetic system. Offset models use
/// mu/sigma (y = x + mu + noise); the line model uses a/b/sigma
/// (y = a*x + b + noise).
struct SystemGen {
    std::string name;
    double mu = 0.0;
    double sigma = 0.0;
    double a = 1.0;
    double b = 0.0;
};

struct GenreWeight {
    std::string name;
    double weight = 1.0;
};

/// Configuration of one synthetic-corpus draw: which generative family,
/// panel sizes, the uniform x range, per-system parameters, optional
/// genre mix, and an optional contamination component that inflates the
/// noise of a random fraction of songs.
struct SynthConfig {
    ModelKind model = ModelKind::I;
    long n_validation = 2;
    long n_test = 1;
    double x_lo = 0.0;
    double x_hi = 1.0;
    std::vector<SystemGen> systems;
    std::vector<GenreWeight> genres;
    std::uint64_t seed = 0;
    double contamination_rate = 0.0;
    double contamination_sigma = 0.0;

    void validate() const {
        if (systems.empty()) throw ConfigError("at least one system required");
        for (const auto& s : systems) {
            if (s.name.empty()) throw ConfigError("system names must be non-empty");
            if (s.sigma < 0.0) throw ConfigError("sigma must be >= 0");
        }
        for (std::size_t i = 0; i < systems.size(); ++i)
            for (std::size_t j = i + 1; j < systems.size(); ++j)
                if (systems[i].name == systems[j].name)
                    throw ConfigError("duplicate system name '" + systems[i].name + "'");
        if (n_validation < 2) throw ConfigError("n_validation must be >= 2");
        if (n_test < 1) throw ConfigError("n_test must be >= 1");
        if (!(x_lo >= 0.0 && x_lo < x_hi && x_hi <= 1.0))
            throw ConfigError("x range must satisfy 0 <= x_lo < x_hi <= 1");
        for (const auto& g : genres)
            if (g.weight <= 0.0) throw ConfigError("genre weights must be positive");
        if (contamination_rate < 0.0 || contamination_rate > 1.0)
            throw ConfigError("contamination rate must lie in [0,1]");
        if (contamination_sigma < 0.0)
            throw ConfigError("contamination sigma must be >= 0");
    }
};

/// One synthetic corpus: the accuracy table (validation rows expose y,
/// test rows hide it) plus the hidden truth and clamp accounting.
struct SynthDataset {
    std::vector<AccuracyPair> table;
    std::map<std::string, std::vector<double>> test_x;
    std::map<std::string, std::vector<double>> test_y;
    long clamp_events = 0;
    long draws = 0;

    double true_test_mean(const std::string& system) const {
        return detail::mean_of(test_y.at(system));
    }
};

namespace detail {

// Substream words under the root seed stream.
inline constexpr std::uint64_t kGenreStream = 0;
inline constexpr std::uint64_t kDataStream = 1;
inline constexpr std::uint64_t kContaminationStream = 2;
inline constexpr std::uint64_t kTrialStream = 3;

inline std::string synth_song_id(long index, long total) {
    int width = 1;
    for (long v = total - 1; v >= 10; v /= 10) ++width;
    width = std::max(width, 3);
    std::string digits = std::to_string(index);
    return "song-" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') +
           digits;
}

inline SynthDataset generate_synthetic(const SynthConfig& c, const SplitRng& root) {
    c.validate();
    const long total = c.n_validation + c.n_test;

    std::vector<std::string> genre_of(static_cast<std::size_t>(total), "unknown");
    if (!c.genres.empty()) {
        double weight_sum = 0.0;
        for (const auto& g : c.genres) weight_sum += g.weight;
        const SplitRng genre_rng = root.child(kGenreStream);
        for (long s = 0; s < total; ++s) {
            double u = genre_rng.child(static_cast<std::uint64_t>(s)).unit(0) * weight_sum;
            for (const auto& g : c.genres) {
                u -= g.weight;
                if (u <= 0.0 || &g == &c.genres.back()) {
                    genre_of[static_cast<std::size_t>(s)] = g.name;
                    break;
                }
            }
        }
    }

    std::vector<bool> contaminated(static_cast<std::size_t>(total), false);
    if (c.contamination_rate > 0.0) {
        const SplitRng contam_rng = root.child(kContaminationStream);
        for (long s = 0; s < total; ++s)
            contaminated[static_cast<std::size_t>(s)] =
                contam_rng.child(static_cast<std::uint64_t>(s)).unit(0) <
                c.contamination_rate;
    }

    SynthDataset out;
    const SplitRng data_rng = root.child(kDataStream);
    for (std::size_t i = 0; i < c.systems.size(); ++i) {
        const SystemGen& sys = c.systems[i];
        const SplitRng sys_rng = data_rng.child(i);
        out.test_x[sys.name].reserve(static_cast<std::size_t>(c.n_test));
        out.test_y[sys.name].reserve(static_cast<std::size_t>(c.n_test));
        for (long s = 0; s < total; ++s) {
            const SplitRng cell = sys_rng.child(static_cast<std::uint64_t>(s));
            const double x = c.x_lo + (c.x_hi - c.x_lo) * cell.unit(0);
            const double z = normal_quantile(cell.unit(1));
            const double sd = contaminated[static_cast<std::size_t>(s)]
                                  ? c.contamination_sigma
                                  : sys.sigma;
            double y = c.model == ModelKind::L ? sys.a * x + sys.b + sd * z
                                               : x + sys.mu + sd * z;
            ++out.draws;
            if (y < 0.0 || y > 1.0) {
                y = std::min(1.0, std::max(0.0, y));
                ++out.clamp_events;
            }

            AccuracyPair row;
            row.song_id = synth_song_id(s, total);
            row.system = sys.name;
            row.genre = genre_of[static_cast<std::size_t>(s)];
            row.x = x;
            const bool validation = s < c.n_validation;
            if (validation) {
                row.y = y;
            } else {
                out.test_x[sys.name].push_back(x);
                out.test_y[sys.name].push_back(y);
            }
            out.table.push_back(std::move(row));
        }
    }
    return out;
}

}  // namespace detail

/// Draws one synthetic corpus, fully determined by the config (seed
/// included). The first n_validation songs form the validation set.
inline SynthDataset generate_synthetic_dataset(const SynthConfig& c) {
    return detail::generate_synthetic(c, SplitRng(c.seed));
}

/// Per-quantile-mode empirical calibration statistics.
struct ModeStats {
    double coverage_song = 0.0;
    double coverage_mean = 0.0;
    double coverage_diff = 0.0;
    double mean_width_song = 0.0;
    double mean_width_mean = 0.0;
    double mean_width_diff = 0.0;
};

/// Outcome of a Monte-Carlo calibration run: how often the per-song,
/// test-mean, and pairwise-difference intervals contained the hidden
/// truth, for both quantile conventions, plus the systematic center
/// error per system (mode-independent).
struct CoverageReport {
    long trials = 0;
    long failed_trials = 0;
    double alpha = 0.05;
    ModelKind fit_model = ModelKind::I;
    double clamp_rate = 0.0;
    std::map<std::string, ModeStats> modes;
    std::map<std::string, double> mean_center_error;
};

/// One row of the optional per-trial log: the test-mean interval of one
/// system under one quantile mode.
struct TrialRecord {
    long trial = 0;
    std::string mode;
    std::string system;
    double center = 0.0;
    double half_width = 0.0;
    double true_mean = 0.0;
    bool covered = false;
};

namespace detail {

// Slop for coverage checks so that zero-noise configs (widths exactly 0,
// centers equal to the truth up to rounding) count as covered.
inline constexpr double kCoverageEps = 1e-12;

struct TrialTally {
    bool failed = false;
    long clamp_events = 0;
    long draws = 0;
    // Indexed by mode (0 = PaperLiteral, 1 = TwoSided).
    long song_hits[2] = {0, 0};
    long song_total[2] = {0, 0};
    double song_width[2] = {0.0, 0.0};
    long mean_hits[2] = {0, 0};
    long mean_total[2] = {0, 0};
    double mean_width[2] = {0.0, 0.0};
    long diff_hits[2] = {0, 0};
    long diff_total[2] = {0, 0};
    double diff_width[2] = {0.0, 0.0};
    std::map<std::string, double> center_error;
    std::vector<TrialRecord> records;
};

}  // namespace detail

/// Monte-Carlo calibration: per trial, draw a corpus, fit `fit_model` on
/// the validation rows, and test every interval kind against the hidden
/// truth. Trials whose fit fails are skipped and counted; more than 1%
/// failures aborts the experiment. Set `record_trials` to collect one
/// TrialRecord per (trial, mode, system) test-mean interval.
inline CoverageReport run_coverage_experiment(
    const SynthConfig& config, ModelKind fit_kind, double alpha, long trials,
    std::vector<TrialRecord>* record_trials = nullptr) {
    config.validate();
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");

    const SplitRng trial_rng = SplitRng(config.seed).child(detail::kTrialStream);
    constexpr QuantileMode kModes[2] = {QuantileMode::PaperLiteral,
                                        QuantileMode::TwoSided};

    std::vector<detail::TrialTally> tallies(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
        detail::TrialTally& tally = tallies[t];
        const SynthDataset data =
            detail::generate_synthetic(config, trial_rng.child(t));
        tally.clamp_events = data.clamp_events;
        tally.draws = data.draws;

        FittedModel model;
        try {
            model = fit_model(fit_kind, data.table);
        } catch (const Error&) {
            tally.failed = true;
            return;
        }

        std::vector<std::string> names;
        for (const auto& [name, xs] : data.test_x) names.push_back(name);

        for (int mi = 0; mi < 2; ++mi) {
            const QuantileMode mode = kModes[mi];
            for (const auto& name : names) {
                const auto& xs = data.test_x.at(name);
                const auto& ys = data.test_y.at(name);
                const double truth = data.true_test_mean(name);

                const IntervalEstimate mean_est =
                    predict_mean(model, name, xs, alpha, mode);
                const bool covered = std::abs(truth - mean_est.center) <=
                                     mean_est.half_width + detail::kCoverageEps;
                tally.mean_hits[mi] += covered ? 1 : 0;
                ++tally.mean_total[mi];
                tally.mean_width[mi] += mean_est.half_width;
                if (record_trials)
                    tally.records.push_back({static_cast<long>(t), to_string(mode), name,
                                             mean_est.center, mean_est.half_width, truth,
                                             covered});
                if (mi == 0)
                    tally.center_error[name] = mean_est.center - truth;

                for (std::size_t j = 0; j < xs.size(); ++j) {
                    const IntervalEstimate song_est =
                        predict_song(model, name, xs[j], alpha, mode);
                    tally.song_hits[mi] += std::abs(ys[j] - song_est.center) <=
                                                   song_est.half_width +
                                                       detail::kCoverageEps
                                               ? 1
                                               : 0;
                    ++tally.song_total[mi];
                    tally.song_width[mi] += song_est.half_width;
                }
            }
            for (std::size_t i = 0; i < names.size(); ++i) {
                for (std::size_t j = i + 1; j < names.size(); ++j) {
                    const IntervalEstimate diff_est = compare_means(
                        model, names[i], data.test_x.at(names[i]), names[j],
                        data.test_x.at(names[j]), alpha, mode);
                    const double truth = data.true_test_mean(names[i]) -
                                         data.true_test_mean(names[j]);
                    tally.diff_hits[mi] += std::abs(truth - diff_est.center) <=
                                                   diff_est.half_width +
                                                       detail::kCoverageEps
                                               ? 1
                                               : 0;
                    ++tally.diff_total[mi];
                    tally.diff_width[mi] += diff_est.half_width;
                }
            }
        }
    });

    CoverageReport report;
    report.trials = trials;
    report.alpha = alpha;
    report.fit_model = fit_kind;

    long clamp_events = 0, draws = 0;
    long song_hits[2] = {0, 0}, song_total[2] = {0, 0};
    long mean_hits[2] = {0, 0}, mean_total[2] = {0, 0};
    long diff_hits[2] = {0, 0}, diff_total[2] = {0, 0};
    double song_width[2] = {0, 0}, mean_width[2] = {0, 0}, diff_width[2] = {0, 0};
    std::map<std::string, double> center_error_sum;
    long ok_trials = 0;

    for (const auto& tally : tallies) {
        clamp_events += tally.clamp_events;
        draws += tally.draws;
        if (tally.failed) {
            ++report.failed_trials;
            continue;
        }
        ++ok_trials;
        for (int mi = 0; mi < 2; ++mi) {
            song_hits[mi] += tally.song_hits[mi];
            song_total[mi] += tally.song_total[mi];
            song_width[mi] += tally.song_width[mi];
            mean_hits[mi] += tally.mean_hits[mi];
            mean_total[mi] += tally.mean_total[mi];
            mean_width[mi] += tally.mean_width[mi];
            diff_hits[mi] += tally.diff_hits[mi];
            diff_total[mi] += tally.diff_total[mi];
            diff_width[mi] += tally.diff_width[mi];
        }
        for (const auto& [name, err] : tally.center_error) center_error_sum[name] += err;
        if (record_trials)
            record_trials->insert(record_trials->end(), tally.records.begin(),
                                  tally.records.end());
    }

    if (report.failed_trials * 100 > trials)
        throw InsufficientData(std::to_string(report.failed_trials) + " of " +
                               std::to_string(trials) + " trial fits failed");
    if (ok_trials == 0) throw InsufficientData("all trial fits failed");

    report.clamp_rate = draws > 0 ? static_cast<double>(clamp_events) /
                                        static_cast<double>(draws)
                                  : 0.0;
    for (int mi = 0; mi < 2; ++mi) {
        ModeStats stats;
        stats.coverage_song = static_cast<double>(song_hits[mi]) /
                              static_cast<double>(song_total[mi]);
        stats.coverage_mean = static_cast<double>(mean_hits[mi]) /
                              static_cast<double>(mean_total[mi]);
        stats.coverage_diff =
            diff_total[mi] > 0 ? static_cast<double>(diff_hits[mi]) /
                                     static_cast<double>(diff_total[mi])
                               : 1.0;
        stats.mean_width_song = song_width[mi] / static_cast<double>(song_total[mi]);
        stats.mean_width_mean = mean_width[mi] / static_cast<double>(mean_total[mi]);
        stats.mean_width_diff =
            diff_total[mi] > 0 ? diff_width[mi] / static_cast<double>(diff_total[mi])
                               : 0.0;
        report.modes[to_string(kModes[mi])] = stats;
    }
    for (const auto& [name, sum] : center_error_sum)
        report.mean_center_error[name] = sum / static_cast<double>(ok_trials);
    return report;
}

// ---- JSON ------------------------------------------------------------------------

inline SynthConfig synth_config_from_json(const nlohmann::json& doc) {
    SynthConfig c;
    try {
        if (!doc.is_object()) throw ConfigError("simulation config must be an object");
        c.model = model_kind_from_string(doc.value("model", std::string("i")));
        c.n_validation = doc.at("n_validation").get<long>();
        c.n_test = doc.at("n_test").get<long>();
        c.x_lo = doc.value("x_lo", 0.0);
        c.x_hi = doc.value("x_hi", 1.0);
        c.seed = doc.value("seed", std::uint64_t{0});
        const double default_mu = doc.value("mu", 0.0);
        const double default_sigma = doc.value("sigma", 0.0);
        if (!doc.contains("systems") || !doc.at("systems").is_array())
            throw ConfigError("'systems' must be an array");
        for (const auto& entry : doc.at("systems")) {
            SystemGen sys;
            if (entry.is_string()) {
                sys.name = entry.get<std::string>();
                sys.mu = default_mu;
                sys.sigma = default_sigma;
            } else {
                sys.name = entry.at("name").get<std::string>();
                sys.mu = entry.value("mu", default_mu);
                sys.sigma = entry.value("sigma", default_sigma);
                sys.a = entry.value("a", 1.0);
                sys.b = entry.value("b", 0.0);
            }
            c.systems.push_back(std::move(sys));
        }
        if (doc.contains("genres")) {
            for (const auto& entry : doc.at("genres")) {
                GenreWeight g;
                if (entry.is_string()) {
                    g.name = entry.get<std::string>();
                } else {
                    g.name = entry.at("name").get<std::string>();
                    g.weight = entry.value("weight", 1.0);
                }
                c.genres.push_back(std::move(g));
            }
        }
        if (doc.contains("contamination")) {
            const auto& contam = doc.at("contamination");
            c.contamination_rate = contam.value("rate", 0.0);
            c.contamination_sigma = contam.value("sigma", 0.0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("simulation config: ") + e.what());
    }
    c.validate();
    return c;
}

inline nlohmann::json synth_config_to_json(const SynthConfig& c) {
    using nlohmann::json;
    json systems = json::array();
    for (const auto& sys : c.systems) {
        json entry = {{"name", sys.name}, {"mu", sys.mu}, {"sigma", sys.sigma}};
        if (c.model == ModelKind::L) {
            entry["a"] = sys.a;
            entry["b"] = sys.b;
        }
        systems.push_back(std::move(entry));
    }
    json doc = {{"model", to_string(c.model)},
                {"n_validation", c.n_validation},
                {"n_test", c.n_test},
                {"x_lo", c.x_lo},
                {"x_hi", c.x_hi},
                {"seed", c.seed},
                {"systems", std::move(systems)}};
    if (!c.genres.empty()) {
        nlohmann::json genres = json::array();
        for (const auto& g : c.genres)
            genres.push_back({{"name", g.name}, {"weight", g.weight}});
        doc["genres"] = std::move(genres);
    }
    if (c.contamination_rate > 0.0)
        doc["contamination"] = {{"rate", c.contamination_rate},
                                {"sigma", c.contamination_sigma}};
    return doc;
}

inline nlohmann::json coverage_report_to_json(const CoverageReport& r) {
    using nlohmann::json;
    json modes = json::object();
    for (const auto& [name, stats] : r.modes)
        modes[name] = {{"coverage_song", stats.coverage_song},
                       {"coverage_mean", stats.coverage_mean},
                       {"coverage_diff", stats.coverage_diff},
                       {"mean_width_song", stats.mean_width_song},
                       {"mean_width_mean", stats.mean_width_mean},
                       {"mean_width_diff", stats.mean_width_diff}};
    json center_error = json::object();
    for (const auto& [name, err] : r.mean_center_error) center_error[name] = err;
    return json{{"trials", r.trials},
                {"failed_trials", r.failed_trials},
                {"alpha", r.alpha},
                {"fit_model", to_string(r.fit_model)},
                {"clamp_rate", r.clamp_rate},
                {"modes", std::move(modes)},
                {"mean_center_error", std::move(center_error)}};
}

inline std::string trial_records_csv(const std::vector<TrialRecord>& records) {
    std::string out = "trial,mode,system,center,half_width,true_mean,covered\n";
    char buf[64];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof(buf), "%ld,", r.trial);
        out += buf;
        out += r.mode;
        out += ',';
        out += r.system;
        std::snprintf(buf, sizeof(buf), ",%.9f,%.9f,%.9f,%d\n", r.center, r.half_width,
                      r.true_mean, r.covered ? 1 : 0);
        out += buf;
    }
    return out;
}

}  // namespace proxyeval
