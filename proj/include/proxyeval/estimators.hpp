#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "proxyeval/errors.hpp"
#include "proxyeval/scoring.hpp"

namespace proxyeval {

// ---- normal quantile ---------------------------------------------------------

namespace detail {

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kSqrt2Pi = 2.5066282746310002;

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

}  // namespace detail

/// Inverse standard-normal CDF. A rational approximation supplies the
/// starting point; one Halley step against erfc pushes the absolute
/// error far below 1e-8 everywhere in (0,1).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("quantile probability must lie strictly inside (0,1)");

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    const double err = detail::normal_cdf(x) - p;
    const double step = err * detail::kSqrt2Pi * std::exp(0.5 * x * x);
    return x - step / (1.0 + 0.5 * x * step);
}

/// How the significance level maps to a quantile. The literal convention
/// uses Q(1-alpha), which two-sided intervals under-cover (about 90% at
/// alpha = 0.05); TwoSided uses Q(1-alpha/2) for nominal coverage.
enum class QuantileMode { PaperLiteral, TwoSided };

inline const char* to_string(QuantileMode mode) {
    return mode == QuantileMode::PaperLiteral ? "paper_literal" : "two_sided";
}

inline QuantileMode quantile_mode_from_string(const std::string& text) {
    if (text == "paper_literal") return QuantileMode::PaperLiteral;
    if (text == "two_sided") return QuantileMode::TwoSided;
    throw ConfigError("unknown quantile mode '" + text +
                      "' (expected 'paper_literal' or 'two_sided')");
}

inline double quantile_multiplier(double alpha, QuantileMode mode) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("alpha must lie strictly inside (0,1)");
    return normal_quantile(mode == QuantileMode::PaperLiteral ? 1.0 - alpha
                                                              : 1.0 - alpha / 2.0);
}

// ---- fitted parameter types ----------------------------------------------------

/// Pooled offset model: y = x + mu + noise, one offset shared by every
/// system, fitted on all |systems| * n validation pairs at once.
struct SParams {
    double mu = 0.0;
    double sigma2 = 0.0;
    double xbar = 0.0;
    double s2x = 0.0;
    long pool_size = 0;
    long n_systems = 0;
    long n = 0;
};

/// Per-system offset model entry: y = x + mu_a + noise for one system.
struct SystemGaussian {
    double mu_a = 0.0;
    double sigma2_a = 0.0;
    double xbar_a = 0.0;
    double s2x_a = 0.0;
    long n = 0;
};

/// Per-system regression entry: y = a * x + b + noise for one system.
struct SystemLine {
    double a = 1.0;
    double b = 0.0;
    double sigma2_a = 0.0;
    double xbar_a = 0.0;
    double s2x_a = 0.0;
    long n = 0;
};

struct IParams {
    std::map<std::string, SystemGaussian> per_system;
};

struct LParams {
    std::map<std::string, SystemLine> per_system;
};

enum class ModelKind { S, I, L };

inline const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::S: return "s";
        case ModelKind::I: return "i";
        case ModelKind::L: return "l";
    }
    return "?";
}

inline ModelKind model_kind_from_string(const std::string& text) {
    if (text == "s") return ModelKind::S;
    if (text == "i") return ModelKind::I;
    if (text == "l") return ModelKind::L;
    throw ConfigError("unknown model '" + text + "' (expected 's', 'i' or 'l')");
}

/// A fitted model plus the quantile convention chosen at fit time.
struct FittedModel {
    QuantileMode quantile_mode = QuantileMode::PaperLiteral;
    std::variant<SParams, IParams, LParams> params;

    ModelKind kind() const { return static_cast<ModelKind>(params.index()); }
};

/// A confidence interval center ± half_width at level 1-alpha.
struct IntervalEstimate {
    double center = 0.0;
    double half_width = 0.0;
    double alpha = 0.05;
    QuantileMode quantile_mode = QuantileMode::PaperLiteral;
};

// ---- fitting -------------------------------------------------------------------

namespace detail {

struct ValidationRows {
    std::vector<double> x;
    std::vector<double> y;
};

/// Groups validation rows (rows carrying y) by system, preserving row order.
inline std::map<std::string, ValidationRows> validation_by_system(
    const std::vector<AccuracyPair>& pairs) {
    std::map<std::string, ValidationRows> groups;
    for (const AccuracyPair& p : pairs) {
        if (!p.y) continue;
        ValidationRows& rows = groups[p.system];
        rows.x.push_back(p.x);
        rows.y.push_back(*p.y);
    }
    return groups;
}

inline double mean_of(const std::vector<double>& v) {
    double sum = 0.0;
    for (double value : v) sum += value;
    return sum / static_cast<double>(v.size());
}

}  // namespace detail

/// Fits the pooled offset model on every validation row of every system.
/// All systems must contribute the same songs; mu and the variances pool
/// the full panel with an unbiased (pool-1) denominator.
inline SParams fit_single_gaussian(const std::vector<AccuracyPair>& pairs) {
    std::map<std::string, std::multiset<std::string>> songs_by_system;
    std::vector<double> xs, ds;
    for (const AccuracyPair& p : pairs) {
        if (!p.y) continue;
        songs_by_system[p.system].insert(p.song_id);
        xs.push_back(p.x);
        ds.push_back(*p.y - p.x);
    }
    if (xs.size() < 2)
        throw InsufficientData("pooled fit needs at least 2 validation rows, got " +
                               std::to_string(xs.size()));
    const auto& reference = songs_by_system.begin()->second;
    for (const auto& [system, songs] : songs_by_system)
        if (songs != reference)
            throw UnbalancedPanel("system '" + system +
                                  "' covers a different validation song set than '" +
                                  songs_by_system.begin()->first + "'");

    SParams out;
    out.pool_size = static_cast<long>(xs.size());
    out.n_systems = static_cast<long>(songs_by_system.size());
    out.n = static_cast<long>(reference.size());
    out.mu = detail::mean_of(ds);
    out.xbar = detail::mean_of(xs);
    double ss_d = 0.0, ss_x = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        ss_d += (ds[i] - out.mu) * (ds[i] - out.mu);
        ss_x += (xs[i] - out.xbar) * (xs[i] - out.xbar);
    }
    out.sigma2 = ss_d / static_cast<double>(out.pool_size - 1);
    out.s2x = ss_x / static_cast<double>(out.pool_size - 1);
    return out;
}

/// Fits one per-system offset entry from that system's validation rows.
inline SystemGaussian fit_individual_gaussian(const std::vector<double>& x,
                                              const std::vector<double>& y,
                                              const std::string& system = "") {
    if (x.size() != y.size()) throw DomainError("x/y length mismatch");
    if (x.size() < 2)
        throw InsufficientData("system '" + system + "' has " +
                               std::to_string(x.size()) +
                               " validation rows; the offset fit needs at least 2");
    SystemGaussian out;
    out.n = static_cast<long>(x.size());
    std::vector<double> ds(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) ds[i] = y[i] - x[i];
    out.mu_a = detail::mean_of(ds);
    out.xbar_a = detail::mean_of(x);
    double ss_d = 0.0, ss_x = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        ss_d += (ds[i] - out.mu_a) * (ds[i] - out.mu_a);
        ss_x += (x[i] - out.xbar_a) * (x[i] - out.xbar_a);
    }
    out.sigma2_a = ss_d / static_cast<double>(out.n - 1);
    out.s2x_a = ss_x / static_cast<double>(out.n - 1);
    return out;
}

inline IParams fit_individual_gaussians(const std::vector<AccuracyPair>& pairs) {
    IParams out;
    for (const auto& [system, rows] : detail::validation_by_system(pairs))
        out.per_system[system] = fit_individual_gaussian(rows.x, rows.y, system);
    if (out.per_system.empty())
        throw InsufficientData("no validation rows (rows with y) in the table");
    return out;
}

/// Least-squares line fit for one system; residual variance uses the
/// n-2 denominator (two fitted parameters).
inline SystemLine fit_linear_regression(const std::vector<double>& x,
                                        const std::vector<double>& y,
                                        const std::string& system = "") {
    if (x.size() != y.size()) throw DomainError("x/y length mismatch");
    if (x.size() < 3)
        throw InsufficientData("system '" + system + "' has " +
                               std::to_string(x.size()) +
                               " validation rows; the line fit needs at least 3");
    SystemLine out;
    out.n = static_cast<long>(x.size());
    out.xbar_a = detail::mean_of(x);
    const double ybar = detail::mean_of(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (y[i] - ybar) * (x[i] - out.xbar_a);
        sxx += (x[i] - out.xbar_a) * (x[i] - out.xbar_a);
    }
    if (sxx == 0.0)
        throw DegenerateDesign("system '" + system +
                               "' has zero validation x-variance; slope undefined");
    out.a = sxy / sxx;
    out.b = ybar - out.a * out.xbar_a;
    out.s2x_a = sxx / static_cast<double>(out.n - 1);
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - out.a * x[i] - out.b;
        rss += r * r;
    }
    out.sigma2_a = rss / static_cast<double>(out.n - 2);
    return out;
}

/// Line fit with the slope pinned; with slope 1 this reduces exactly to
/// the per-system offset fit (intercept = mu_a, variance matches).
inline SystemLine fit_linear_regression_fixed_slope(const std::vector<double>& x,
                                                    const std::vector<double>& y,
                                                    double slope,
                                                    const std::string& system = "") {
    if (x.size() != y.size()) throw DomainError("x/y length mismatch");
    if (x.size() < 2)
        throw InsufficientData("system '" + system + "' has " +
                               std::to_string(x.size()) +
                               " validation rows; the pinned-slope fit needs at least 2");
    SystemLine out;
    out.n = static_cast<long>(x.size());
    out.a = slope;
    out.xbar_a = detail::mean_of(x);
    const double ybar = detail::mean_of(y);
    out.b = ybar - slope * out.xbar_a;
    double sxx = 0.0, rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - out.xbar_a) * (x[i] - out.xbar_a);
        const double r = y[i] - slope * x[i] - out.b;
        rss += r * r;
    }
    out.s2x_a = sxx / static_cast<double>(out.n - 1);
    out.sigma2_a = rss / static_cast<double>(out.n - 1);
    return out;
}

inline LParams fit_linear_regressions(const std::vector<AccuracyPair>& pairs) {
    LParams out;
    for (const auto& [system, rows] : detail::validation_by_system(pairs))
        out.per_system[system] = fit_linear_regression(rows.x, rows.y, system);
    if (out.per_system.empty())
        throw InsufficientData("no validation rows (rows with y) in the table");
    return out;
}

inline FittedModel fit_model(ModelKind kind, const std::vector<AccuracyPair>& pairs,
                             QuantileMode mode = QuantileMode::PaperLiteral) {
    FittedModel model;
    model.quantile_mode = mode;
    switch (kind) {
        case ModelKind::S: model.params = fit_single_gaussian(pairs); break;
        case ModelKind::I: model.params = fit_individual_gaussians(pairs); break;
        case ModelKind::L: model.params = fit_linear_regressions(pairs); break;
    }
    return model;
}

// ---- prediction ------------------------------------------------------------------

namespace detail {

/// One system's parameters flattened to a prediction line: the S model
/// is slope 1 with the pooled offset and pooled design statistics.
struct PredictorView {
    double slope = 1.0;
    double intercept = 0.0;
    double sigma2 = 0.0;
    double xbar = 0.0;
    double s2x = 0.0;
    double pool = 0.0;
};

inline PredictorView view_for(const FittedModel& model, const std::string& system) {
    if (const auto* s = std::get_if<SParams>(&model.params))
        return {1.0, s->mu, s->sigma2, s->xbar, s->s2x,
                static_cast<double>(s->pool_size)};
    if (const auto* i = std::get_if<IParams>(&model.params)) {
        auto it = i->per_system.find(system);
        if (it == i->per_system.end()) throw UnknownSystem(system);
        const SystemGaussian& g = it->second;
        return {1.0, g.mu_a, g.sigma2_a, g.xbar_a, g.s2x_a, static_cast<double>(g.n)};
    }
    const auto& l = std::get<LParams>(model.params);
    auto it = l.per_system.find(system);
    if (it == l.per_system.end()) throw UnknownSystem(system);
    const SystemLine& line = it->second;
    return {line.a, line.b, line.sigma2_a, line.xbar_a, line.s2x_a,
            static_cast<double>(line.n)};
}

inline double leverage(const PredictorView& v, double x) {
    const double dx = x - v.xbar;
    if (v.s2x > 0.0) return dx * dx / ((v.pool - 1.0) * v.s2x);
    if (dx == 0.0) return 0.0;
    throw DegenerateDesign(
        "zero validation x-variance; cannot extrapolate away from xbar");
}

/// Variance of the estimated test-set mean: sigma2 * sum_j(1 + 1/N +
/// leverage_j) / m^2. Treats per-song prediction errors as independent,
/// which understates the variance when m greatly exceeds N because every
/// song shares the same fitted offset.
inline double mean_variance(const PredictorView& v, const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += 1.0 + 1.0 / v.pool + leverage(v, x);
    const double m = static_cast<double>(xs.size());
    return v.sigma2 * sum / (m * m);
}

}  // namespace detail

/// Interval for one song's GT accuracy given its pseudo accuracy.
inline IntervalEstimate predict_song(const FittedModel& model, const std::string& system,
                                     double x, double alpha,
                                     QuantileMode mode = QuantileMode::PaperLiteral) {
    const double q = quantile_multiplier(alpha, mode);
    const auto v = detail::view_for(model, system);
    IntervalEstimate out;
    out.center = v.slope * x + v.intercept;
    out.half_width =
        q * std::sqrt(v.sigma2) *
        std::sqrt(1.0 + 1.0 / v.pool + detail::leverage(v, x));
    out.alpha = alpha;
    out.quantile_mode = mode;
    return out;
}

/// Interval for the mean GT accuracy over a test set of pseudo accuracies.
inline IntervalEstimate predict_mean(const FittedModel& model, const std::string& system,
                                     const std::vector<double>& xs, double alpha,
                                     QuantileMode mode = QuantileMode::PaperLiteral) {
    if (xs.empty()) throw EmptyTestSet("system '" + system + "'");
    const double q = quantile_multiplier(alpha, mode);
    const auto v = detail::view_for(model, system);
    IntervalEstimate out;
    out.center = v.slope * detail::mean_of(xs) + v.intercept;
    out.half_width = q * std::sqrt(detail::mean_variance(v, xs));
    out.alpha = alpha;
    out.quantile_mode = mode;
    return out;
}

/// Interval for the difference in mean GT accuracy, first system minus
/// second; positive centers mean the first system is estimated better.
inline IntervalEstimate compare_means(const FittedModel& model,
                                      const std::string& system_a,
                                      const std::vector<double>& xs_a,
                                      const std::string& system_b,
                                      const std::vector<double>& xs_b, double alpha,
                                      QuantileMode mode = QuantileMode::PaperLiteral) {
    if (xs_a.empty()) throw EmptyTestSet("system '" + system_a + "'");
    if (xs_b.empty()) throw EmptyTestSet("system '" + system_b + "'");
    const double q = quantile_multiplier(alpha, mode);
    const auto va = detail::view_for(model, system_a);
    const auto vb = detail::view_for(model, system_b);
    IntervalEstimate out;
    out.center = (va.slope * detail::mean_of(xs_a) + va.intercept) -
                 (vb.slope * detail::mean_of(xs_b) + vb.intercept);
    out.half_width =
        q * std::sqrt(detail::mean_variance(va, xs_a) + detail::mean_variance(vb, xs_b));
    out.alpha = alpha;
    out.quantile_mode = mode;
    return out;
}

// ---- params JSON -----------------------------------------------------------------

inline nlohmann::json params_to_json(const FittedModel& model) {
    using nlohmann::json;
    json doc;
    doc["model"] = to_string(model.kind());
    doc["quantile_mode"] = to_string(model.quantile_mode);
    if (const auto* s = std::get_if<SParams>(&model.params)) {
        doc["pooled"] = {{"mu", s->mu},           {"sigma2", s->sigma2},
                         {"xbar", s->xbar},       {"s2x", s->s2x},
                         {"pool_size", s->pool_size}, {"n_systems", s->n_systems},
                         {"n", s->n}};
    } else if (const auto* i = std::get_if<IParams>(&model.params)) {
        json per = json::object();
        for (const auto& [name, g] : i->per_system)
            per[name] = {{"mu_a", g.mu_a},
                         {"sigma2_a", g.sigma2_a},
                         {"xbar_a", g.xbar_a},
                         {"s2x_a", g.s2x_a},
                         {"n", g.n}};
        doc["per_system"] = std::move(per);
    } else {
        const auto& l = std::get<LParams>(model.params);
        json per = json::object();
        for (const auto& [name, line] : l.per_system)
            per[name] = {{"a", line.a},
                         {"b", line.b},
                         {"sigma2_a", line.sigma2_a},
                         {"xbar_a", line.xbar_a},
                         {"s2x_a", line.s2x_a},
                         {"n", line.n}};
        doc["per_system"] = std::move(per);
    }
    return doc;
}

inline FittedModel params_from_json(const nlohmann::json& doc) {
    auto require = [&doc](const char* field) -> const nlohmann::json& {
        if (!doc.contains(field))
            throw SchemaError(field, "missing from params document");
        return doc.at(field);
    };

    FittedModel model;
    const ModelKind kind = model_kind_from_string(require("model").get<std::string>());
    model.quantile_mode =
        quantile_mode_from_string(require("quantile_mode").get<std::string>());
    try {
        if (kind == ModelKind::S) {
            const auto& p = require("pooled");
            SParams s;
            s.mu = p.at("mu").get<double>();
            s.sigma2 = p.at("sigma2").get<double>();
            s.xbar = p.at("xbar").get<double>();
            s.s2x = p.at("s2x").get<double>();
            s.pool_size = p.at("pool_size").get<long>();
            s.n_systems = p.at("n_systems").get<long>();
            s.n = p.at("n").get<long>();
            model.params = s;
        } else if (kind == ModelKind::I) {
            IParams params;
            for (const auto& [name, p] : require("per_system").items()) {
                SystemGaussian g;
                g.mu_a = p.at("mu_a").get<double>();
                g.sigma2_a = p.at("sigma2_a").get<double>();
                g.xbar_a = p.at("xbar_a").get<double>();
                g.s2x_a = p.at("s2x_a").get<double>();
                g.n = p.at("n").get<long>();
                params.per_system[name] = g;
            }
            model.params = std::move(params);
        } else {
            LParams params;
            for (const auto& [name, p] : require("per_system").items()) {
                SystemLine line;
                line.a = p.at("a").get<double>();
                line.b = p.at("b").get<double>();
                line.sigma2_a = p.at("sigma2_a").get<double>();
                line.xbar_a = p.at("xbar_a").get<double>();
                line.s2x_a = p.at("s2x_a").get<double>();
                line.n = p.at("n").get<long>();
                params.per_system[name] = line;
            }
            model.params = std::move(params);
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("params", e.what());
    }
    return model;
}

}  // namespace proxyeval
