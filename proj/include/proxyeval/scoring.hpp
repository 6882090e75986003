#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proxyeval/annotation.hpp"
#include "proxyeval/chord.hpp"
#include "proxyeval/errors.hpp"
#include "proxyeval/manifest.hpp"
#include "proxyeval/parallel.hpp"

namespace proxyeval {

/// Frame grid used for sampling annotations. The evaluation span is
/// [0, reference duration), sampled at frame centers (k + 0.5) * hop.
struct FrameSpec {
    double hop = 0.1;
};

/// One scored (song, system) cell: x is the accuracy against the pseudo
/// annotation, y the accuracy against ground truth when available.
struct AccuracyPair {
    std::string song_id;
    std::string system;
    std::string genre;
    double x = 0.0;
    std::optional<double> y;
};

namespace detail {

inline std::size_t frame_count(double duration, double hop) {
    // Guard against ratios like 30.000000000000004/0.1 inventing a frame.
    return static_cast<std::size_t>(std::ceil(duration / hop - 1e-9));
}

}  // namespace detail

/// Frame-wise accuracy of `pred` against `ref`: the fraction of
/// non-excluded frames whose labels reduce to the same vocabulary class.
/// Frames whose reference label reduces to the excluded bucket are
/// dropped from the denominator.
inline double frame_accuracy(const Annotation& pred, const Annotation& ref,
                             const FrameSpec& spec, const Vocabulary& vocab) {
    if (spec.hop <= 0.0) throw ConfigError("frame hop must be positive");
    const double duration = ref.duration();
    if (duration <= 0.0) throw EmptyReference();

    const std::size_t frames = detail::frame_count(duration, spec.hop);
    std::size_t matched = 0;
    std::size_t excluded = 0;
    for (std::size_t k = 0; k < frames; ++k) {
        const double t = (static_cast<double>(k) + 0.5) * spec.hop;
        switch (vocab.labels_match(ref.label_at(t), pred.label_at(t))) {
            case MatchResult::Match: ++matched; break;
            case MatchResult::Mismatch: break;
            case MatchResult::Excluded: ++excluded; break;
        }
    }
    if (excluded == frames) throw AllFramesExcluded();
    return static_cast<double>(matched) / static_cast<double>(frames - excluded);
}

/// Scores every (song, system) cell of a dataset: x against the pseudo
/// annotation, y against ground truth for validation songs. Cells are
/// scored in parallel; the result is ordered by (system, song_id).
inline std::vector<AccuracyPair> score_dataset(const Dataset& ds, const FrameSpec& spec,
                                               const Vocabulary& vocab) {
    std::vector<std::string> systems = ds.systems;
    std::sort(systems.begin(), systems.end());

    std::vector<std::size_t> song_order(ds.songs.size());
    for (std::size_t i = 0; i < song_order.size(); ++i) song_order[i] = i;
    std::sort(song_order.begin(), song_order.end(), [&](std::size_t a, std::size_t b) {
        return ds.songs[a].song_id < ds.songs[b].song_id;
    });

    std::vector<AccuracyPair> pairs(systems.size() * ds.songs.size());
    parallel_for(pairs.size(), [&](std::size_t cell) {
        const std::string& system = systems[cell / ds.songs.size()];
        const SongRecord& song = ds.songs[song_order[cell % ds.songs.size()]];
        const Annotation& pred = song.predictions.at(system);
        AccuracyPair pair;
        pair.song_id = song.song_id;
        pair.system = system;
        pair.genre = song.genre;
        try {
            pair.x = frame_accuracy(pred, song.pseudo, spec, vocab);
            if (song.gt) pair.y = frame_accuracy(pred, *song.gt, spec, vocab);
        } catch (const Error& e) {
            throw Error("song '" + song.song_id + "', system '" + system +
                        "': " + e.what());
        }
        pairs[cell] = std::move(pair);
    });
    return pairs;
}

// ---- accuracy table CSV -----------------------------------------------------

inline std::string format_accuracy_csv(const std::vector<AccuracyPair>& pairs) {
    std::string out = "song_id,system,genre,x,y\n";
    char buf[32];
    for (const AccuracyPair& p : pairs) {
        out += p.song_id;
        out += ',';
        out += p.system;
        out += ',';
        out += p.genre;
        out += ',';
        std::snprintf(buf, sizeof(buf), "%.6f", p.x);
        out += buf;
        out += ',';
        if (p.y) {
            std::snprintf(buf, sizeof(buf), "%.6f", *p.y);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

inline std::vector<AccuracyPair> parse_accuracy_csv(std::string_view text) {
    std::vector<AccuracyPair> pairs;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "song_id,system,genre,x,y")
                throw MalformedLine(line_no, "expected header 'song_id,system,genre,x,y'");
            continue;
        }

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 5)
            throw MalformedLine(line_no, "expected 5 comma-separated fields");

        AccuracyPair p;
        p.song_id = std::string(fields[0]);
        p.system = std::string(fields[1]);
        p.genre = std::string(fields[2]);
        p.x = detail::parse_double(fields[3], line_no, "x");
        if (!fields[4].empty()) p.y = detail::parse_double(fields[4], line_no, "y");
        if (p.x < 0.0 || p.x > 1.0 || (p.y && (*p.y < 0.0 || *p.y > 1.0)))
            throw MalformedLine(line_no, "accuracy outside [0,1]");
        pairs.push_back(std::move(p));
    }
    return pairs;
}

}  // namespace proxyeval
