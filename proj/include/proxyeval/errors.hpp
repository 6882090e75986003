#pragma once

#include <stdexcept>
#include <string>

namespace proxyeval {

/// Base class for every error this library raises on bad data or bad
/// configuration. Programming errors (violated preconditions that cannot
/// be triggered by input files) use the standard exceptions instead.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ---- chord / annotation parsing -------------------------------------------

class MalformedLabel : public Error {
public:
    explicit MalformedLabel(const std::string& text)
        : Error("malformed chord label: '" + text + "'") {}
};

class MalformedLine : public Error {
public:
    MalformedLine(int line_no, const std::string& detail)
        : Error("line " + std::to_string(line_no) + ": " + detail),
          line_no_(line_no) {}
    int line_no() const { return line_no_; }

private:
    int line_no_;
};

class OverlapError : public Error {
public:
    explicit OverlapError(int line_no)
        : Error("line " + std::to_string(line_no) +
                ": segment overlaps previous segment by more than 1 ms"),
          line_no_(line_no) {}
    int line_no() const { return line_no_; }

private:
    int line_no_;
};

class NonMonotonic : public Error {
public:
    explicit NonMonotonic(int line_no)
        : Error("line " + std::to_string(line_no) +
                ": segment onsets are not non-decreasing"),
          line_no_(line_no) {}
    int line_no() const { return line_no_; }

private:
    int line_no_;
};

// ---- manifest / dataset ----------------------------------------------------

class MissingFile : public Error {
public:
    explicit MissingFile(const std::string& path)
        : Error("missing or unreadable file: " + path), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& field, const std::string& detail = "")
        : Error("manifest schema error at '" + field + "'" +
                (detail.empty() ? "" : ": " + detail)),
          field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

class MissingPrediction : public Error {
public:
    MissingPrediction(const std::string& song, const std::string& system)
        : Error("song '" + song + "' has no prediction for system '" + system + "'"),
          song_(song), system_(system) {}
    const std::string& song() const { return song_; }
    const std::string& system() const { return system_; }

private:
    std::string song_;
    std::string system_;
};

// ---- scoring ----------------------------------------------------------------

class EmptyReference : public Error {
public:
    explicit EmptyReference(const std::string& context = "")
        : Error("reference annotation has zero duration" +
                (context.empty() ? "" : " (" + context + ")")) {}
};

class AllFramesExcluded : public Error {
public:
    explicit AllFramesExcluded(const std::string& context = "")
        : Error("every frame is excluded from evaluation" +
                (context.empty() ? "" : " (" + context + ")")) {}
};

// ---- model fitting / prediction ----------------------------------------------

class InsufficientData : public Error {
public:
    explicit InsufficientData(const std::string& detail)
        : Error("insufficient data: " + detail) {}
};

class UnbalancedPanel : public Error {
public:
    explicit UnbalancedPanel(const std::string& detail)
        : Error("unbalanced validation panel: " + detail) {}
};

class DegenerateDesign : public Error {
public:
    explicit DegenerateDesign(const std::string& detail)
        : Error("degenerate design: " + detail) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& detail)
        : Error("domain error: " + detail) {}
};

class UnknownSystem : public Error {
public:
    explicit UnknownSystem(const std::string& name)
        : Error("system '" + name + "' is not part of the fitted model"),
          name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class EmptyTestSet : public Error {
public:
    explicit EmptyTestSet(const std::string& context = "")
        : Error("test set is empty" + (context.empty() ? "" : " (" + context + ")")) {}
};

// ---- configuration -----------------------------------------------------------

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& detail)
        : Error("invalid configuration: " + detail) {}
};

}  // namespace proxyeval
