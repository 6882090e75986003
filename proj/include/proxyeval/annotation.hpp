#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "proxyeval/chord.hpp"
#include "proxyeval/errors.hpp"

namespace proxyeval {

/// One labeled time span, [onset, offset) in seconds.
struct Segment {
    double onset = 0.0;
    double offset = 0.0;
    ChordLabel label;
};

/// A time-ordered, non-overlapping sequence of labeled segments for one
/// song. Gaps between segments read as NoChord; duration is the final
/// offset (0 when empty).
class Annotation {
public:
    Annotation() = default;

    /// Validates ordering and strict positive durations. Segments must
    /// already be exactly non-overlapping (use parse_lab for tolerant
    /// ingestion of real files).
    static Annotation from_segments(std::vector<Segment> segments) {
        for (std::size_t i = 0; i < segments.size(); ++i) {
            if (!(segments[i].offset > segments[i].onset))
                throw DomainError("segment " + std::to_string(i) +
                                  " has non-positive duration");
            if (i > 0 && segments[i].onset < segments[i - 1].offset)
                throw DomainError("segment " + std::to_string(i) +
                                  " overlaps its predecessor");
        }
        Annotation a;
        a.segments_ = std::move(segments);
        return a;
    }

    const std::vector<Segment>& segments() const { return segments_; }
    bool empty() const { return segments_.empty(); }

    double duration() const {
        return segments_.empty() ? 0.0 : segments_.back().offset;
    }

    /// Label at time t. Times inside a gap, before the first onset, or at
    /// or beyond the final offset read as NoChord.
    const ChordLabel& label_at(double t) const {
        static const ChordLabel no_chord{LabelKind::NoChord, 0, QualityFamily::Maj, ""};
        auto it = std::upper_bound(
            segments_.begin(), segments_.end(), t,
            [](double value, const Segment& s) { return value < s.onset; });
        if (it == segments_.begin()) return no_chord;
        --it;
        return t < it->offset ? it->label : no_chord;
    }

private:
    std::vector<Segment> segments_;
};

namespace detail {

inline double parse_double(std::string_view token, int line_no, const char* what) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = first + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw MalformedLine(line_no, std::string("cannot parse ") + what + " '" +
                                         std::string(token) + "'");
    return value;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
        std::size_t begin = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
        if (pos > begin) fields.push_back(line.substr(begin, pos - begin));
    }
    return fields;
}

}  // namespace detail

/// Parses LAB text: one `onset offset label` triple per line, whitespace
/// separated. Blank lines and lines starting with '#' are ignored.
/// Segments overlapping the previous one by at most 1 ms are clipped
/// (the earlier offset is pulled back); larger overlaps raise
/// OverlapError, and onsets moving backwards raise NonMonotonic.
inline Annotation parse_lab(std::string_view text) {
    constexpr double kOverlapTolerance = 1e-3;

    std::vector<Segment> segments;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        auto fields = detail::split_fields(line);
        if (fields.empty() || fields[0].front() == '#') {
            if (pos > text.size()) break;
            continue;
        }
        if (fields.size() != 3)
            throw MalformedLine(line_no, "expected 'onset offset label', got " +
                                             std::to_string(fields.size()) + " fields");

        Segment seg;
        seg.onset = detail::parse_double(fields[0], line_no, "onset");
        seg.offset = detail::parse_double(fields[1], line_no, "offset");
        if (seg.onset < 0.0)
            throw MalformedLine(line_no, "negative onset");
        if (!(seg.offset > seg.onset))
            throw MalformedLine(line_no, "non-positive segment duration");
        try {
            seg.label = parse_chord_label(fields[2]);
        } catch (const MalformedLabel& e) {
            throw MalformedLine(line_no, e.what());
        }

        if (!segments.empty()) {
            Segment& prev = segments.back();
            if (seg.onset < prev.onset) throw NonMonotonic(line_no);
            if (seg.onset < prev.offset) {
                if (prev.offset - seg.onset > kOverlapTolerance)
                    throw OverlapError(line_no);
                prev.offset = seg.onset;
                if (!(prev.offset > prev.onset)) throw OverlapError(line_no);
            }
        }
        segments.push_back(std::move(seg));

        if (pos > text.size()) break;
    }
    return Annotation::from_segments(std::move(segments));
}

/// Renders an Annotation as LAB text with 6-decimal times and canonical
/// labels, one segment per line, no trailing newline.
inline std::string write_lab(const Annotation& a) {
    std::string out;
    char buf[64];
    bool first = true;
    for (const Segment& seg : a.segments()) {
        if (!first) out += '\n';
        first = false;
        std::snprintf(buf, sizeof(buf), "%.6f %.6f ", seg.onset, seg.offset);
        out += buf;
        out += render_chord_label(seg.label);
    }
    return out;
}

}  // namespace proxyeval
