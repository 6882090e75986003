#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "proxyeval/annotation.hpp"
#include "proxyeval/errors.hpp"
#include "proxyeval/parallel.hpp"

namespace proxyeval {

/// One song: identity, genre tag, reference annotations, and one
/// prediction per system. Validation songs carry ground truth; test
/// songs do not.
struct SongRecord {
    std::string song_id;
    std::string genre;
    std::optional<Annotation> gt;
    Annotation pseudo;
    std::map<std::string, Annotation> predictions;

    bool is_validation() const { return gt.has_value(); }
};

/// A loaded corpus: songs plus the ordered pool of system names. Every
/// song holds a prediction for every system.
struct Dataset {
    std::vector<SongRecord> songs;
    std::vector<std::string> systems;

    std::size_t validation_count() const {
        std::size_t n = 0;
        for (const auto& s : songs) n += s.is_validation() ? 1 : 0;
        return n;
    }
    std::size_t test_count() const { return songs.size() - validation_count(); }
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile(path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

inline Annotation load_lab_file(const std::filesystem::path& path) {
    try {
        return parse_lab(read_file(path));
    } catch (const MissingFile&) {
        throw;
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

}  // namespace detail

/// Loads a manifest JSON document and every annotation file it references.
/// Relative paths resolve against the manifest's directory. Annotation
/// files load concurrently per song.
inline Dataset load_manifest(const std::filesystem::path& manifest_path) {
    using nlohmann::json;

    json doc;
    try {
        doc = json::parse(detail::read_file(manifest_path));
    } catch (const json::parse_error& e) {
        throw SchemaError("$", e.what());
    }

    if (!doc.is_object()) throw SchemaError("$", "manifest must be a JSON object");
    if (!doc.contains("systems") || !doc["systems"].is_array())
        throw SchemaError("systems", "required array of system names");
    if (!doc.contains("songs") || !doc["songs"].is_array())
        throw SchemaError("songs", "required array of song records");

    Dataset ds;
    for (const auto& sys : doc["systems"]) {
        if (!sys.is_string()) throw SchemaError("systems", "entries must be strings");
        ds.systems.push_back(sys.get<std::string>());
    }
    if (ds.systems.empty()) throw SchemaError("systems", "must list at least one system");

    const std::filesystem::path base = manifest_path.parent_path();
    auto resolve = [&base](const std::string& rel) {
        std::filesystem::path p(rel);
        return p.is_absolute() ? p : base / p;
    };

    struct PendingSong {
        std::string id;
        std::string genre;
        std::optional<std::string> gt_path;
        std::string pseudo_path;
        std::map<std::string, std::string> prediction_paths;
    };
    std::vector<PendingSong> pending;

    for (std::size_t i = 0; i < doc["songs"].size(); ++i) {
        const auto& song = doc["songs"][i];
        const std::string where = "songs[" + std::to_string(i) + "]";
        if (!song.is_object()) throw SchemaError(where, "must be an object");

        PendingSong p;
        if (!song.contains("id") || !song["id"].is_string())
            throw SchemaError(where + ".id", "required string");
        p.id = song["id"].get<std::string>();
        if (!song.contains("genre") || !song["genre"].is_string())
            throw SchemaError(where + ".genre", "required string");
        p.genre = song["genre"].get<std::string>();
        if (!song.contains("gt") || (!song["gt"].is_null() && !song["gt"].is_string()))
            throw SchemaError(where + ".gt", "required path or null");
        if (song["gt"].is_string()) p.gt_path = song["gt"].get<std::string>();
        if (!song.contains("pseudo") || !song["pseudo"].is_string())
            throw SchemaError(where + ".pseudo", "required path");
        p.pseudo_path = song["pseudo"].get<std::string>();
        if (!song.contains("predictions") || !song["predictions"].is_object())
            throw SchemaError(where + ".predictions", "required object");
        for (const auto& [name, path] : song["predictions"].items()) {
            if (!path.is_string())
                throw SchemaError(where + ".predictions." + name, "must be a path");
            p.prediction_paths[name] = path.get<std::string>();
        }
        for (const auto& sys : ds.systems)
            if (!p.prediction_paths.count(sys)) throw MissingPrediction(p.id, sys);
        pending.push_back(std::move(p));
    }

    ds.songs.resize(pending.size());
    parallel_for(pending.size(), [&](std::size_t i) {
        const PendingSong& p = pending[i];
        SongRecord rec;
        rec.song_id = p.id;
        rec.genre = p.genre;
        if (p.gt_path) rec.gt = detail::load_lab_file(resolve(*p.gt_path));
        rec.pseudo = detail::load_lab_file(resolve(p.pseudo_path));
        for (const auto& sys : ds.systems)
            rec.predictions[sys] = detail::load_lab_file(resolve(p.prediction_paths.at(sys)));
        ds.songs[i] = std::move(rec);
    });

    return ds;
}

}  // namespace proxyeval
