#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "proxyeval/manifest.hpp"
#include "proxyeval/rng.hpp"
#include "proxyeval/scoring.hpp"

using namespace proxyeval;

namespace {

std::string data_path(const std::string& rel) {
    return std::string(PROXYEVAL_DATA_DIR) + "/" + rel;
}

std::string golden_path(const std::string& rel) {
    return std::string(PROXYEVAL_GOLDEN_DIR) + "/" + rel;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

/// Gap-free random annotation over [0, duration): contiguous segments,
/// classes limited to scorable ones so no frame is ever excluded.
Annotation random_annotation(const SplitRng& rng, double duration) {
    const Vocabulary vocab = Vocabulary::majmin();
    const int cuts = 2 + static_cast<int>(rng.unit(0) * 12);
    std::vector<double> bounds{0.0, duration};
    for (int i = 0; i < cuts; ++i) bounds.push_back(rng.unit(10 + i) * duration);
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

    std::vector<Segment> segments;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        Segment seg;
        seg.onset = bounds[i];
        seg.offset = bounds[i + 1];
        seg.label = parse_chord_label(
            vocab.representative(static_cast<int>(rng.unit(1000 + i) * 25)));
        segments.push_back(seg);
    }
    return Annotation::from_segments(std::move(segments));
}

}  // namespace

TEST_CASE("frame_accuracy basics", "[scoring]") {
    const Vocabulary vocab = Vocabulary::majmin();
    const FrameSpec spec;

    SECTION("identity scores 1") {
        const Annotation a = parse_lab("0 5 C:maj\n5 7.3 A:min\n7.3 9 N");
        REQUIRE(frame_accuracy(a, a, spec, vocab) == 1.0);
    }
    SECTION("half match") {
        const Annotation pred = parse_lab("0 10 C:maj");
        const Annotation ref = parse_lab("0 5 C:maj\n5 10 G:maj");
        REQUIRE_THAT(frame_accuracy(pred, ref, spec, vocab),
                     Catch::Matchers::WithinAbs(0.5, 1e-12));
    }
    SECTION("excluded reference frames leave the denominator") {
        const Annotation pred = parse_lab("0 10 C:maj");
        const Annotation ref = parse_lab("0 5 C:maj\n5 10 X");
        REQUIRE_THAT(frame_accuracy(pred, ref, spec, vocab),
                     Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
    SECTION("fully excluded reference is an error") {
        REQUIRE_THROWS_AS(frame_accuracy(parse_lab("0 10 C:maj"), parse_lab("0 10 X"),
                                         spec, vocab),
                          AllFramesExcluded);
    }
    SECTION("empty reference is an error") {
        REQUIRE_THROWS_AS(frame_accuracy(parse_lab("0 10 C:maj"), Annotation(), spec,
                                         vocab),
                          EmptyReference);
    }
    SECTION("hop must be positive") {
        REQUIRE_THROWS_AS(frame_accuracy(parse_lab("0 1 C"), parse_lab("0 1 C"),
                                         FrameSpec{0.0}, vocab),
                          ConfigError);
    }
    SECTION("frame count survives dust in duration/hop ratios") {
        // 119 segments of 0.3 s: 35.7 s; 0.1 hop must give exactly 357 frames,
        // which shows up as accuracy denominators.
        std::vector<Segment> segs;
        for (int i = 0; i < 119; ++i)
            segs.push_back({i * 0.3, (i + 1) * 0.3, parse_chord_label("C:maj")});
        const Annotation ref = Annotation::from_segments(segs);
        const Annotation pred = parse_lab("0 0.1 G:maj\n0.1 35.7 C:maj");
        REQUIRE_THAT(frame_accuracy(pred, ref, spec, vocab),
                     Catch::Matchers::WithinAbs(356.0 / 357.0, 1e-12));
    }
}

TEST_CASE("score_dataset matches the independently enumerated golden table",
          "[scoring]") {
    const Dataset ds = load_manifest(data_path("fixture3/manifest.json"));
    const std::vector<AccuracyPair> pairs =
        score_dataset(ds, FrameSpec{}, Vocabulary::majmin());

    REQUIRE(format_accuracy_csv(pairs) == slurp(golden_path("fixture3_scores.csv")));

    const std::vector<AccuracyPair> golden =
        parse_accuracy_csv(slurp(golden_path("fixture3_scores.csv")));
    REQUIRE(golden.size() == pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        REQUIRE(pairs[i].song_id == golden[i].song_id);
        REQUIRE(pairs[i].system == golden[i].system);
        REQUIRE(pairs[i].genre == golden[i].genre);
        REQUIRE_THAT(pairs[i].x, Catch::Matchers::WithinAbs(golden[i].x, 1e-6));
        REQUIRE(pairs[i].y.has_value() == golden[i].y.has_value());
        if (pairs[i].y)
            REQUIRE_THAT(*pairs[i].y, Catch::Matchers::WithinAbs(*golden[i].y, 1e-6));
    }
}

TEST_CASE("frame accuracy tracks the exact overlap oracle", "[scoring]") {
    const Vocabulary vocab = Vocabulary::majmin();
    const SplitRng rng(7151);
    for (std::uint64_t round = 0; round < 50; ++round) {
        const SplitRng r = rng.child(round);
        const double duration = (50 + static_cast<int>(r.unit(0) * 250)) * 0.1;
        const Annotation ref = random_annotation(r.child(1), duration);
        const Annotation pred = random_annotation(r.child(2), duration);
        const double frame = frame_accuracy(pred, ref, FrameSpec{}, vocab);
        const double exact = oracles::exact_overlap_accuracy(pred, ref, vocab);
        const double bound =
            0.1 *
            static_cast<double>(pred.segments().size() + ref.segments().size()) /
            duration;
        REQUIRE_THAT(frame, Catch::Matchers::WithinAbs(exact, bound));
    }
}

TEST_CASE("halving the hop moves accuracy at most by the boundary measure",
          "[scoring]") {
    const Vocabulary vocab = Vocabulary::majmin();
    const SplitRng rng(40423);
    for (std::uint64_t round = 0; round < 20; ++round) {
        const SplitRng r = rng.child(round);
        const double duration = (80 + static_cast<int>(r.unit(0) * 200)) * 0.1;
        const Annotation ref = random_annotation(r.child(1), duration);
        const Annotation pred = random_annotation(r.child(2), duration);
        const double coarse = frame_accuracy(pred, ref, FrameSpec{0.1}, vocab);
        const double fine = frame_accuracy(pred, ref, FrameSpec{0.05}, vocab);
        const double bound =
            0.1 *
            static_cast<double>(pred.segments().size() + ref.segments().size()) /
            duration;
        REQUIRE(std::abs(coarse - fine) <= bound);
    }
}

TEST_CASE("accuracy CSV round trip and validation", "[scoring]") {
    std::vector<AccuracyPair> pairs;
    pairs.push_back({"song-a", "sysA", "rock", 0.931234, 0.95});
    pairs.push_back({"song-c", "sysA", "jazz", 0.25, std::nullopt});
    const std::string csv = format_accuracy_csv(pairs);
    REQUIRE(csv == "song_id,system,genre,x,y\n"
                   "song-a,sysA,rock,0.931234,0.950000\n"
                   "song-c,sysA,jazz,0.250000,\n");

    const auto parsed = parse_accuracy_csv(csv);
    REQUIRE(parsed.size() == 2);
    REQUIRE(parsed[0].y.has_value());
    REQUIRE_FALSE(parsed[1].y.has_value());
    REQUIRE_THAT(parsed[0].x, Catch::Matchers::WithinAbs(0.931234, 1e-12));

    REQUIRE_THROWS_AS(parse_accuracy_csv("bogus header\n"), MalformedLine);
    REQUIRE_THROWS_AS(parse_accuracy_csv("song_id,system,genre,x,y\na,b,c,1.5,\n"),
                      MalformedLine);
    REQUIRE_THROWS_AS(parse_accuracy_csv("song_id,system,genre,x,y\na,b,c\n"),
                      MalformedLine);
}
