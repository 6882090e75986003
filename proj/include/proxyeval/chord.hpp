#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "proxyeval/errors.hpp"

namespace proxyeval {

/// What a timed label denotes: a pitched chord, an explicit no-chord
/// region ("N"), or an unknown / unevaluable region ("X").
enum class LabelKind { Chord, NoChord, Unknown };

/// Coarse chord quality after vocabulary reduction.
enum class QualityFamily { Maj, Min, Other };

/// A parsed chord label. `root` is a semitone 0..11 (C=0) and `quality`
/// keeps the raw quality text; both are meaningful only for Chord labels.
struct ChordLabel {
    LabelKind kind = LabelKind::NoChord;
    int root = 0;
    QualityFamily family = QualityFamily::Maj;
    std::string quality;

    friend bool operator==(const ChordLabel& a, const ChordLabel& b) {
        if (a.kind != b.kind) return false;
        if (a.kind != LabelKind::Chord) return true;
        return a.root == b.root && a.family == b.family && a.quality == b.quality;
    }
};

namespace detail {

inline constexpr std::array<const char*, 12> kSharpNames = {
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"};

inline int natural_semitone(char c) {
    switch (c) {
        case 'C': return 0;
        case 'D': return 2;
        case 'E': return 4;
        case 'F': return 5;
        case 'G': return 7;
        case 'A': return 9;
        case 'B': return 11;
        default: return -1;
    }
}

inline QualityFamily quality_family(std::string_view q) {
    if (q.empty() || q == "maj" || q == "maj7" || q == "7" || q == "maj6")
        return QualityFamily::Maj;
    if (q == "min" || q == "min7" || q == "min6" || q == "dim")
        return QualityFamily::Min;
    return QualityFamily::Other;
}

}  // namespace detail

/// Parses a chord label: "N", "X", or "<root>[:quality][/bass]" where the
/// root is A..G with optional '#'/'b' modifiers. The bass note, when
/// present, is validated for non-emptiness and then discarded. Throws
/// MalformedLabel on anything else.
inline ChordLabel parse_chord_label(std::string_view text) {
    if (text.empty()) throw MalformedLabel(std::string(text));
    if (text == "N") return {LabelKind::NoChord, 0, QualityFamily::Maj, ""};
    if (text == "X") return {LabelKind::Unknown, 0, QualityFamily::Maj, ""};

    const int base = detail::natural_semitone(text[0]);
    if (base < 0) throw MalformedLabel(std::string(text));
    int root = base;
    std::size_t pos = 1;
    while (pos < text.size() && (text[pos] == '#' || text[pos] == 'b')) {
        root += text[pos] == '#' ? 1 : -1;
        ++pos;
    }
    root = ((root % 12) + 12) % 12;

    std::string quality;
    if (pos < text.size()) {
        if (text[pos] == ':') {
            ++pos;
            std::size_t q_begin = pos;
            while (pos < text.size() && text[pos] != '/') ++pos;
            quality.assign(text.substr(q_begin, pos - q_begin));
            if (quality.empty()) throw MalformedLabel(std::string(text));
        }
        if (pos < text.size()) {
            if (text[pos] != '/' || pos + 1 >= text.size())
                throw MalformedLabel(std::string(text));
            // Bass note after '/' must be non-empty; it is otherwise ignored.
        } else if (quality.empty()) {
            throw MalformedLabel(std::string(text));
        }
    }

    return {LabelKind::Chord, root, detail::quality_family(quality), quality};
}

/// Renders a label in canonical form: sharp note names, the reduced
/// quality ("maj"/"min"), no bass. Other-family chords keep their raw
/// quality text so the rendering stays invertible.
inline std::string render_chord_label(const ChordLabel& label) {
    switch (label.kind) {
        case LabelKind::NoChord: return "N";
        case LabelKind::Unknown: return "X";
        case LabelKind::Chord: break;
    }
    std::string out = detail::kSharpNames[static_cast<std::size_t>(label.root)];
    out += ':';
    switch (label.family) {
        case QualityFamily::Maj: out += "maj"; break;
        case QualityFamily::Min: out += "min"; break;
        case QualityFamily::Other: out += label.quality; break;
    }
    return out;
}

/// Outcome of comparing one frame's labels.
enum class MatchResult { Match, Mismatch, Excluded };

/// The reduced class space used for scoring and voting. The majmin
/// vocabulary has 26 classes: 12 major triads, 12 minor triads, one
/// no-chord class, and one excluded bucket that never scores or votes.
class Vocabulary {
public:
    static Vocabulary majmin(bool unknown_as_nochord = false) {
        return Vocabulary(unknown_as_nochord);
    }

    static constexpr int class_count() { return 26; }
    static constexpr int nochord_class() { return 24; }
    static constexpr int excluded_class() { return 25; }

    int class_of(const ChordLabel& label) const {
        switch (label.kind) {
            case LabelKind::NoChord: return nochord_class();
            case LabelKind::Unknown:
                return unknown_as_nochord_ ? nochord_class() : excluded_class();
            case LabelKind::Chord: break;
        }
        switch (label.family) {
            case QualityFamily::Maj: return label.root;
            case QualityFamily::Min: return label.root + 12;
            case QualityFamily::Other: return excluded_class();
        }
        return excluded_class();
    }

    /// A canonical label for each class, e.g. class 1 -> "C#:maj".
    std::string representative(int cls) const {
        if (cls < 0 || cls >= class_count())
            throw DomainError("class id " + std::to_string(cls) + " out of range");
        if (cls == nochord_class()) return "N";
        if (cls == excluded_class()) return "X";
        std::string out = detail::kSharpNames[static_cast<std::size_t>(cls % 12)];
        out += cls < 12 ? ":maj" : ":min";
        return out;
    }

    /// Frame-level comparison under this vocabulary. A frame whose
    /// reference label reduces to the excluded bucket does not count at
    /// all; otherwise the frame matches iff both classes agree.
    MatchResult labels_match(const ChordLabel& reference, const ChordLabel& estimate) const {
        const int ref_cls = class_of(reference);
        if (ref_cls == excluded_class()) return MatchResult::Excluded;
        const int est_cls = class_of(estimate);
        return ref_cls == est_cls ? MatchResult::Match : MatchResult::Mismatch;
    }

    bool unknown_as_nochord() const { return unknown_as_nochord_; }

private:
    explicit Vocabulary(bool unknown_as_nochord)
        : unknown_as_nochord_(unknown_as_nochord) {}

    bool unknown_as_nochord_;
};

}  // namespace proxyeval
