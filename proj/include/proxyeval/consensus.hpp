#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "proxyeval/annotation.hpp"
#include "proxyeval/chord.hpp"
#include "proxyeval/errors.hpp"
#include "proxyeval/scoring.hpp"

namespace proxyeval {

/// Tie-break order for majority voting: the first listed system wins
/// ties. Must cover every participating system.
struct VotePolicy {
    std::vector<std::string> priority;

    int rank_of(const std::string& system) const {
        auto it = std::find(priority.begin(), priority.end(), system);
        if (it == priority.end())
            throw ConfigError("system '" + system + "' missing from vote priority list");
        return static_cast<int>(it - priority.begin());
    }
};

namespace detail {

/// Majority vote over one frame's labels, returning the winning class id.
/// Among classes tied at the top count, the one voted by the highest
/// priority system wins.
inline int majority_vote_class(const std::vector<std::pair<std::string, ChordLabel>>& votes,
                               const Vocabulary& vocab, const VotePolicy& policy) {
    if (votes.size() < 2)
        throw ConfigError("majority vote needs at least 2 systems");

    std::array<int, 26> counts{};
    std::array<int, 26> best_rank{};
    best_rank.fill(static_cast<int>(policy.priority.size()));
    static_assert(Vocabulary::class_count() == 26);

    for (const auto& [system, label] : votes) {
        const int cls = vocab.class_of(label);
        const int rank = policy.rank_of(system);
        ++counts[static_cast<std::size_t>(cls)];
        best_rank[static_cast<std::size_t>(cls)] =
            std::min(best_rank[static_cast<std::size_t>(cls)], rank);
    }

    int winner = -1;
    for (int cls = 0; cls < Vocabulary::class_count(); ++cls) {
        if (counts[static_cast<std::size_t>(cls)] == 0) continue;
        if (winner < 0 ||
            counts[static_cast<std::size_t>(cls)] > counts[static_cast<std::size_t>(winner)] ||
            (counts[static_cast<std::size_t>(cls)] == counts[static_cast<std::size_t>(winner)] &&
             best_rank[static_cast<std::size_t>(cls)] < best_rank[static_cast<std::size_t>(winner)]))
            winner = cls;
    }
    return winner;
}

}  // namespace detail

/// Majority vote over one frame's labels. Votes are cast on vocabulary
/// classes, so equivalent chord spellings vote together; the returned
/// label is the canonical representative of the winning class.
inline ChordLabel majority_vote_frame(
    const std::vector<std::pair<std::string, ChordLabel>>& votes,
    const Vocabulary& vocab, const VotePolicy& policy) {
    return parse_chord_label(
        vocab.representative(detail::majority_vote_class(votes, vocab, policy)));
}

/// Frame-level majority-vote combination of several systems' predictions.
/// Votes at frame centers over [0, max prediction duration), then merges
/// adjacent equal-class frames into grid-aligned segments.
inline Annotation consensus_annotation(const std::map<std::string, Annotation>& preds,
                                       const FrameSpec& spec, const Vocabulary& vocab,
                                       const VotePolicy& policy) {
    if (preds.size() < 2)
        throw ConfigError("consensus needs at least 2 systems");
    if (spec.hop <= 0.0) throw ConfigError("frame hop must be positive");

    double duration = 0.0;
    for (const auto& [system, ann] : preds) duration = std::max(duration, ann.duration());
    if (duration <= 0.0) return Annotation();

    const std::size_t frames = detail::frame_count(duration, spec.hop);
    std::vector<Segment> segments;
    int open_class = -1;
    std::size_t open_start = 0;

    std::vector<std::pair<std::string, ChordLabel>> votes;
    votes.reserve(preds.size());
    for (std::size_t k = 0; k < frames; ++k) {
        const double t = (static_cast<double>(k) + 0.5) * spec.hop;
        votes.clear();
        for (const auto& [system, ann] : preds) votes.emplace_back(system, ann.label_at(t));
        const int cls = detail::majority_vote_class(votes, vocab, policy);
        if (cls != open_class) {
            if (open_class >= 0)
                segments.push_back({static_cast<double>(open_start) * spec.hop,
                                    static_cast<double>(k) * spec.hop,
                                    parse_chord_label(vocab.representative(open_class))});
            open_class = cls;
            open_start = k;
        }
    }
    if (open_class >= 0)
        segments.push_back({static_cast<double>(open_start) * spec.hop,
                            static_cast<double>(frames) * spec.hop,
                            parse_chord_label(vocab.representative(open_class))});
    return Annotation::from_segments(std::move(segments));
}

}  // namespace proxyeval
