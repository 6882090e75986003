#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "proxyeval/annotation.hpp"
#include "proxyeval/consensus.hpp"
#include "proxyeval/scoring.hpp"

using namespace proxyeval;
using Catch::Matchers::WithinAbs;

namespace {

const Vocabulary kVocab = Vocabulary::majmin();

std::vector<std::pair<std::string, ChordLabel>> votes(
    const std::vector<std::pair<std::string, std::string>>& raw) {
    std::vector<std::pair<std::string, ChordLabel>> out;
    for (const auto& [system, label] : raw)
        out.emplace_back(system, parse_chord_label(label));
    return out;
}

int vote_class(const std::vector<std::pair<std::string, std::string>>& raw,
               const std::vector<std::string>& priority) {
    return kVocab.class_of(majority_vote_frame(votes(raw), kVocab, VotePolicy{priority}));
}

}  // namespace

TEST_CASE("frame-level majority vote", "[consensus]") {
    const int c_maj = kVocab.class_of(parse_chord_label("C:maj"));
    const int g_maj = kVocab.class_of(parse_chord_label("G:maj"));

    SECTION("strict majority wins regardless of priority") {
        const std::vector<std::pair<std::string, std::string>> raw{
            {"s1", "C:maj"}, {"s2", "C:maj"}, {"s3", "G:maj"}};
        REQUIRE(vote_class(raw, {"s1", "s2", "s3"}) == c_maj);
        REQUIRE(vote_class(raw, {"s3", "s2", "s1"}) == c_maj);
    }
    SECTION("ties go to the highest-priority voter") {
        const std::vector<std::pair<std::string, std::string>> raw{
            {"a", "C:maj"}, {"b", "G:maj"}};
        REQUIRE(vote_class(raw, {"a", "b"}) == c_maj);
        REQUIRE(vote_class(raw, {"b", "a"}) == g_maj);
    }
    SECTION("equivalent spellings vote together") {
        REQUIRE(vote_class({{"a", "C:maj7"}, {"b", "C"}, {"c", "G:maj"}},
                           {"c", "a", "b"}) == c_maj);
        REQUIRE(vote_class({{"a", "Db:min"}, {"b", "C#:min7"}, {"c", "N"}},
                           {"c", "a", "b"}) ==
                kVocab.class_of(parse_chord_label("C#:min")));
    }
    SECTION("unanimous vote") {
        REQUIRE(vote_class({{"a", "A:min"}, {"b", "A:min6"}, {"c", "A:dim"}},
                           {"a", "b", "c"}) ==
                kVocab.class_of(parse_chord_label("A:min")));
    }
    SECTION("non-scorable labels can win") {
        const ChordLabel out = majority_vote_frame(
            votes({{"a", "X"}, {"b", "X"}, {"c", "C:maj"}}), kVocab,
            VotePolicy{{"a", "b", "c"}});
        REQUIRE(out.kind == LabelKind::Unknown);
    }
    SECTION("winning label is the canonical representative") {
        const ChordLabel out = majority_vote_frame(
            votes({{"a", "Db:maj7"}, {"b", "C#"}, {"c", "C#:maj6"}}), kVocab,
            VotePolicy{{"a", "b", "c"}});
        REQUIRE(render_chord_label(out) == "C#:maj");
    }
    SECTION("needs at least two voters") {
        REQUIRE_THROWS_AS(majority_vote_frame(votes({{"a", "C:maj"}}), kVocab,
                                              VotePolicy{{"a"}}),
                          ConfigError);
    }
    SECTION("voter missing from the priority list") {
        REQUIRE_THROWS_AS(
            majority_vote_frame(votes({{"a", "C:maj"}, {"b", "G:maj"}}), kVocab,
                                VotePolicy{{"a"}}),
            ConfigError);
    }
}

TEST_CASE("consensus annotation", "[consensus]") {
    const FrameSpec spec;

    SECTION("two systems disagreeing everywhere reproduce the priority winner") {
        const std::map<std::string, Annotation> preds{
            {"a", parse_lab("0 10 C:maj")}, {"b", parse_lab("0 10 G:maj")}};
        const Annotation first =
            consensus_annotation(preds, spec, kVocab, VotePolicy{{"a", "b"}});
        REQUIRE(write_lab(first) == "0.000000 10.000000 C:maj");
        const Annotation second =
            consensus_annotation(preds, spec, kVocab, VotePolicy{{"b", "a"}});
        REQUIRE(write_lab(second) == "0.000000 10.000000 G:maj");
    }
    SECTION("segment boundaries land on the frame grid") {
        const std::map<std::string, Annotation> preds{
            {"a", parse_lab("0 1 C:maj\n1 2 G:maj")},
            {"b", parse_lab("0 0.95 C:maj\n0.95 2 G:maj")}};
        const Annotation out =
            consensus_annotation(preds, spec, kVocab, VotePolicy{{"a", "b"}});
        REQUIRE(write_lab(out) == "0.000000 1.000000 C:maj\n1.000000 2.000000 G:maj");
    }
    SECTION("spans to the longest prediction, voting no-chord past shorter ones") {
        const std::map<std::string, Annotation> preds{
            {"a", parse_lab("0 1 C:maj")},
            {"b", parse_lab("0 1 C:maj\n1 2 N")},
            {"c", parse_lab("0 1 C:maj\n1 2 G:maj")}};
        const Annotation out = consensus_annotation(preds, spec, kVocab,
                                                    VotePolicy{{"c", "a", "b"}});
        REQUIRE(write_lab(out) == "0.000000 1.000000 C:maj\n1.000000 2.000000 N");
        REQUIRE_THAT(out.duration(), WithinAbs(2.0, 1e-12));
    }
    SECTION("empty predictions give an empty consensus") {
        const std::map<std::string, Annotation> preds{{"a", Annotation()},
                                                      {"b", Annotation()}};
        REQUIRE(consensus_annotation(preds, spec, kVocab, VotePolicy{{"a", "b"}})
                    .empty());
    }
    SECTION("disjoint error thirds are outvoted") {
        const Annotation gt = parse_lab("0 30 C:maj");
        const std::map<std::string, Annotation> preds{
            {"s1", parse_lab("0 10 G:maj\n10 30 C:maj")},
            {"s2", parse_lab("0 10 C:maj\n10 20 G:maj\n20 30 C:maj")},
            {"s3", parse_lab("0 20 C:maj\n20 30 G:maj")}};

        for (const auto& [system, pred] : preds)
            REQUIRE_THAT(frame_accuracy(pred, gt, spec, kVocab),
                         WithinAbs(2.0 / 3.0, 1e-12));

        const Annotation consensus = consensus_annotation(
            preds, spec, kVocab, VotePolicy{{"s1", "s2", "s3"}});
        REQUIRE(frame_accuracy(consensus, gt, spec, kVocab) == 1.0);
        REQUIRE(write_lab(consensus) == "0.000000 30.000000 C:maj");
    }
    SECTION("priority permutation cannot change majority outcomes") {
        const std::map<std::string, Annotation> preds{
            {"s1", parse_lab("0 10 G:maj\n10 30 C:maj")},
            {"s2", parse_lab("0 10 C:maj\n10 20 G:maj\n20 30 C:maj")},
            {"s3", parse_lab("0 20 C:maj\n20 30 G:maj")}};
        const std::vector<std::vector<std::string>> orders{
            {"s1", "s2", "s3"}, {"s3", "s1", "s2"}, {"s2", "s3", "s1"}};
        const Annotation base =
            consensus_annotation(preds, spec, kVocab, VotePolicy{orders[0]});
        for (const auto& order : orders)
            REQUIRE(write_lab(consensus_annotation(preds, spec, kVocab,
                                                   VotePolicy{order})) ==
                    write_lab(base));
    }
    SECTION("fewer than two systems is refused") {
        const std::map<std::string, Annotation> preds{{"a", parse_lab("0 1 C:maj")}};
        REQUIRE_THROWS_AS(
            consensus_annotation(preds, spec, kVocab, VotePolicy{{"a"}}),
            ConfigError);
    }
    SECTION("policy must cover every system") {
        const std::map<std::string, Annotation> preds{
            {"a", parse_lab("0 1 C:maj")}, {"b", parse_lab("0 1 G:maj")}};
        REQUIRE_THROWS_AS(
            consensus_annotation(preds, spec, kVocab, VotePolicy{{"a"}}),
            ConfigError);
    }
}
