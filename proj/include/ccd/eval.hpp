#pragma once

// Evaluation metrics over prediction / ground-truth pairs and the
// per-line (centroid distance, angular error) and per-side CCD MAE reports.

#include "ccd/error.hpp"
#include "ccd/geometry.hpp"
#include "ccd/heatmap.hpp"
#include "ccd/manifest.hpp"
#include "ccd/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace ccd {

struct EvalOptions {
    double cutoff = kDefaultCutoff;
    RansacConfig ransac{};
    double truth_sigma = 3.0;  ///< sigma used to render truth segments into masks
};

/// Centerline channels in report order: left shaft, left neck, right neck, right shaft.
inline std::array<ChannelName, 4> report_channels() {
    return {shaft_centerline(Side::Left), neck_centerline(Side::Left), neck_centerline(Side::Right),
            shaft_centerline(Side::Right)};
}

struct LineMetrics {
    ChannelName channel;
    bool ok = false;
    double centroid_distance = 0.0;  ///< px
    double angular_error = 0.0;      ///< degrees, [0, 90]
    std::size_t inliers = 0;
    std::string failure;

    friend bool operator==(const LineMetrics&, const LineMetrics&) = default;
};

struct SideCcd {
    Side side = Side::Left;
    bool ok = false;
    double predicted = 0.0;
    double truth = 0.0;
    double error = 0.0;  ///< |predicted - truth|
    std::string failure;

    friend bool operator==(const SideCcd&, const SideCcd&) = default;
};

struct CaseReport {
    std::string id;
    std::vector<LineMetrics> lines;
    std::vector<SideCcd> ccd;

    bool failed() const {
        return std::any_of(lines.begin(), lines.end(), [](const auto& l) { return !l.ok; }) ||
               std::any_of(ccd.begin(), ccd.end(), [](const auto& c) { return !c.ok; });
    }

    friend bool operator==(const CaseReport&, const CaseReport&) = default;
};

struct ChannelAggregate {
    ChannelName channel;
    std::size_t count = 0;
    std::optional<double> mean_centroid_distance;
    std::optional<double> mean_angular_error;

    friend bool operator==(const ChannelAggregate&, const ChannelAggregate&) = default;
};

struct SideAggregate {
    Side side = Side::Left;
    std::size_t count = 0;
    std::optional<double> ccd_mae;

    friend bool operator==(const SideAggregate&, const SideAggregate&) = default;
};

struct AggregateReport {
    std::size_t case_count = 0;
    std::size_t failure_count = 0;
    std::vector<ChannelAggregate> channels;
    std::vector<SideAggregate> sides;

    friend bool operator==(const AggregateReport&, const AggregateReport&) = default;
};

namespace detail {

inline LineMetrics failed_line(const ChannelName& channel, std::string why) {
    LineMetrics m;
    m.channel = channel;
    m.failure = std::move(why);
    return m;
}

/// Metrics plus the fitted prediction line, kept for CCD computation.
struct LineEvaluation {
    LineMetrics metrics;
    std::optional<Line2D> predicted_line;
};

inline LineEvaluation evaluate_line(const ChannelRaster& pred, const Segment& truth_segment, const EvalOptions& opt) {
    LineEvaluation out;
    out.metrics.channel = pred.name();
    try {
        const auto truth_mask =
            render_line_heatmap(truth_segment, opt.truth_sigma, pred.width(), pred.height(), pred.name());
        const auto pred_fit = fit_channel(pred, opt.ransac, opt.cutoff);
        const auto truth_fit = fit_channel(truth_mask, opt.ransac, opt.cutoff);
        out.predicted_line = pred_fit.fit.line;
        out.metrics.centroid_distance = centroid_distance(pred_fit.cloud, truth_fit.cloud);
        out.metrics.angular_error = undirected_angle(pred_fit.fit.line, truth_fit.fit.line);
        out.metrics.inliers = pred_fit.fit.inlier_count;
        out.metrics.ok = true;
    } catch (const Error& e) {
        out.metrics = failed_line(pred.name(), e.what());
        out.predicted_line.reset();
    }
    return out;
}

} // namespace detail

/// Centroid distance and angular error of one predicted channel against a truth segment.
///
/// The truth segment is rendered into a noise-free mask; both masks are
/// thresholded and fitted with the same cutoff and RANSAC settings, so a
/// prediction equal to its truth rendering scores exactly zero. Failures are
/// returned as a record with `ok == false`.
inline LineMetrics line_metrics(const ChannelRaster& pred, const Segment& truth_segment, const EvalOptions& opt = {}) {
    return detail::evaluate_line(pred, truth_segment, opt).metrics;
}

/// Evaluates an in-memory prediction against ground truth.
inline CaseReport evaluate_case(const std::string& id, const Heatmap& pred, const GroundTruth& truth,
                                const EvalOptions& opt = {}) {
    CaseReport report;
    report.id = id;
    std::array<std::optional<Line2D>, 4> fitted;
    const auto channels = report_channels();
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const auto& name = channels[i];
        const auto& side_truth = truth.side(name.side);
        const ChannelRaster* raster = pred.find(name);
        if (!side_truth) {
            report.lines.push_back(detail::failed_line(name, "no ground truth for side " + std::string(side_key(name.side))));
            continue;
        }
        if (raster == nullptr) {
            report.lines.push_back(detail::failed_line(name, "missing channel \"" + name.label() + "\""));
            continue;
        }
        const bool is_neck = name.structure == Structure::NeckCenterline;
        auto ev = detail::evaluate_line(*raster, is_neck ? side_truth->neck : side_truth->shaft, opt);
        fitted[i] = ev.predicted_line;
        report.lines.push_back(std::move(ev.metrics));
    }

    for (Side side : {Side::Left, Side::Right}) {
        SideCcd c;
        c.side = side;
        const auto& side_truth = truth.side(side);
        std::optional<Line2D> neck, shaft;
        for (std::size_t i = 0; i < channels.size(); ++i) {
            if (channels[i].side != side) continue;
            (channels[i].structure == Structure::NeckCenterline ? neck : shaft) = fitted[i];
        }
        if (!side_truth) {
            c.failure = "no ground truth";
        } else if (!neck || !shaft) {
            c.truth = side_truth->ccd;
            c.failure = "centerline fit unavailable";
        } else {
            c.ok = true;
            c.predicted = ccd_angle(*neck, *shaft);
            c.truth = side_truth->ccd;
            c.error = std::abs(c.predicted - c.truth);
        }
        report.ccd.push_back(std::move(c));
    }
    return report;
}

/// File-based variant: loads the prediction manifest and truth.json.
inline CaseReport evaluate_case(const std::filesystem::path& pred_manifest, const std::filesystem::path& truth_file,
                                const EvalOptions& opt = {}) {
    const auto truth = load_truth(truth_file);
    const auto pred = load_heatmap(pred_manifest);
    return evaluate_case(pred_manifest.parent_path().filename().string(), pred, truth, opt);
}

/// Means over successful records; failed cases are counted, not penalized.
inline AggregateReport aggregate(const std::vector<CaseReport>& reports) {
    AggregateReport agg;
    agg.case_count = reports.size();
    for (const auto& name : report_channels()) {
        ChannelAggregate a;
        a.channel = name;
        double cd = 0.0, ae = 0.0;
        for (const auto& r : reports) {
            for (const auto& l : r.lines) {
                if (l.ok && l.channel == name) {
                    cd += l.centroid_distance;
                    ae += l.angular_error;
                    ++a.count;
                }
            }
        }
        if (a.count > 0) {
            a.mean_centroid_distance = cd / static_cast<double>(a.count);
            a.mean_angular_error = ae / static_cast<double>(a.count);
        }
        agg.channels.push_back(a);
    }
    for (Side side : {Side::Left, Side::Right}) {
        SideAggregate s;
        s.side = side;
        double sum = 0.0;
        for (const auto& r : reports) {
            for (const auto& c : r.ccd) {
                if (c.ok && c.side == side) {
                    sum += c.error;
                    ++s.count;
                }
            }
        }
        if (s.count > 0) s.ccd_mae = sum / static_cast<double>(s.count);
        agg.sides.push_back(s);
    }
    for (const auto& r : reports) agg.failure_count += r.failed() ? 1 : 0;
    return agg;
}

// --- serialization ---------------------------------------------------------

using ojson = nlohmann::ordered_json;

namespace detail {

inline ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

inline std::optional<double> read_optional(const nlohmann::json& v) {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}

inline ChannelName parse_channel(const nlohmann::json& v) {
    const auto name = ChannelName::parse(v.get<std::string>());
    if (!name) throw Error(ErrorKind::Parse, "unknown channel in report: " + v.get<std::string>());
    return *name;
}

inline Side parse_side_field(const nlohmann::json& v) {
    const auto side = parse_side(v.get<std::string>());
    if (!side) throw Error(ErrorKind::Parse, "bad side in report");
    return *side;
}

} // namespace detail

inline ojson to_json(const CaseReport& r) {
    ojson doc;
    doc["id"] = r.id;
    doc["lines"] = ojson::array();
    for (const auto& l : r.lines) {
        ojson e;
        e["channel"] = l.channel.label();
        e["ok"] = l.ok;
        e["centroid_distance"] = l.centroid_distance;
        e["angular_error"] = l.angular_error;
        e["inliers"] = l.inliers;
        e["failure"] = l.failure;
        doc["lines"].push_back(std::move(e));
    }
    doc["ccd"] = ojson::array();
    for (const auto& c : r.ccd) {
        ojson e;
        e["side"] = side_key(c.side);
        e["ok"] = c.ok;
        e["predicted"] = c.predicted;
        e["truth"] = c.truth;
        e["error"] = c.error;
        e["failure"] = c.failure;
        doc["ccd"].push_back(std::move(e));
    }
    return doc;
}

inline ojson to_json(const AggregateReport& a) {
    ojson doc;
    doc["case_count"] = a.case_count;
    doc["failure_count"] = a.failure_count;
    doc["lines"] = ojson::array();
    for (const auto& c : a.channels) {
        ojson e;
        e["channel"] = c.channel.label();
        e["count"] = c.count;
        e["mean_centroid_distance"] = detail::optional_number(c.mean_centroid_distance);
        e["mean_angular_error"] = detail::optional_number(c.mean_angular_error);
        doc["lines"].push_back(std::move(e));
    }
    doc["ccd_mae"] = ojson::array();
    for (const auto& s : a.sides) {
        ojson e;
        e["side"] = side_key(s.side);
        e["count"] = s.count;
        e["mae"] = detail::optional_number(s.ccd_mae);
        doc["ccd_mae"].push_back(std::move(e));
    }
    return doc;
}

inline CaseReport case_report_from_json(const nlohmann::json& doc) {
    try {
        CaseReport r;
        r.id = doc.at("id").get<std::string>();
        for (const auto& e : doc.at("lines")) {
            LineMetrics l;
            l.channel = detail::parse_channel(e.at("channel"));
            l.ok = e.at("ok").get<bool>();
            l.centroid_distance = e.at("centroid_distance").get<double>();
            l.angular_error = e.at("angular_error").get<double>();
            l.inliers = e.at("inliers").get<std::size_t>();
            l.failure = e.at("failure").get<std::string>();
            r.lines.push_back(std::move(l));
        }
        for (const auto& e : doc.at("ccd")) {
            SideCcd c;
            c.side = detail::parse_side_field(e.at("side"));
            c.ok = e.at("ok").get<bool>();
            c.predicted = e.at("predicted").get<double>();
            c.truth = e.at("truth").get<double>();
            c.error = e.at("error").get<double>();
            c.failure = e.at("failure").get<std::string>();
            r.ccd.push_back(std::move(c));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("malformed case report: ") + e.what());
    }
}

inline AggregateReport aggregate_from_json(const nlohmann::json& doc) {
    try {
        AggregateReport a;
        a.case_count = doc.at("case_count").get<std::size_t>();
        a.failure_count = doc.at("failure_count").get<std::size_t>();
        for (const auto& e : doc.at("lines")) {
            ChannelAggregate c;
            c.channel = detail::parse_channel(e.at("channel"));
            c.count = e.at("count").get<std::size_t>();
            c.mean_centroid_distance = detail::read_optional(e.at("mean_centroid_distance"));
            c.mean_angular_error = detail::read_optional(e.at("mean_angular_error"));
            a.channels.push_back(c);
        }
        for (const auto& e : doc.at("ccd_mae")) {
            SideAggregate s;
            s.side = detail::parse_side_field(e.at("side"));
            s.count = e.at("count").get<std::size_t>();
            s.ccd_mae = detail::read_optional(e.at("mae"));
            a.sides.push_back(s);
        }
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("malformed aggregate report: ") + e.what());
    }
}

/// Full evaluation document: the aggregate plus every case.
struct EvaluationRun {
    AggregateReport aggregate;
    std::vector<CaseReport> cases;

    friend bool operator==(const EvaluationRun&, const EvaluationRun&) = default;
};

inline ojson to_json(const EvaluationRun& run) {
    ojson doc;
    doc["aggregate"] = to_json(run.aggregate);
    doc["cases"] = ojson::array();
    for (const auto& c : run.cases) doc["cases"].push_back(to_json(c));
    return doc;
}

inline EvaluationRun evaluation_from_json(const nlohmann::json& doc) {
    EvaluationRun run;
    if (!doc.is_object() || !doc.contains("aggregate") || !doc.contains("cases")) {
        throw Error(ErrorKind::Parse, "evaluation report needs aggregate and cases");
    }
    run.aggregate = aggregate_from_json(doc["aggregate"]);
    for (const auto& c : doc["cases"]) run.cases.push_back(case_report_from_json(c));
    return run;
}

namespace detail {

inline std::string line_row_label(const ChannelName& name) {
    std::string s(to_string(name.side));
    s += name.structure == Structure::NeckCenterline ? " neck centerline" : " shaft centerline";
    return s;
}

inline std::string fixed(const std::optional<double>& v, int precision) {
    if (!v) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
    return buf;
}

} // namespace detail

/// Plain-text tables: per-centerline metrics, then CCD MAE per femur.
inline std::string format_text(const AggregateReport& a) {
    std::ostringstream out;
    char buf[256];
    out << "Evaluation of individual femur centerlines\n";
    std::snprintf(buf, sizeof buf, "%-24s | %-34s | %-26s\n", "Femur line", "Mean Centroids Euclidean distance",
                  "Mean Angular error(degrees)");
    out << buf;
    out << std::string(24, '-') << "-+-" << std::string(34, '-') << "-+-" << std::string(26, '-') << '\n';
    for (const auto& c : a.channels) {
        std::snprintf(buf, sizeof buf, "%-24s | %34s | %26s\n", detail::line_row_label(c.channel).c_str(),
                      detail::fixed(c.mean_centroid_distance, 2).c_str(), detail::fixed(c.mean_angular_error, 3).c_str());
        out << buf;
    }
    out << '\n';
    out << "Mean absolute error of CCD\n";
    std::snprintf(buf, sizeof buf, "%-24s | %-28s\n", "Femur", "Mean Absolute Error (degrees)");
    out << buf;
    out << std::string(24, '-') << "-+-" << std::string(28, '-') << '\n';
    for (const auto& s : a.sides) {
        const std::string label = std::string(to_string(s.side)) + " Femur";
        std::snprintf(buf, sizeof buf, "%-24s | %28s\n", label.c_str(), detail::fixed(s.ccd_mae, 3).c_str());
        out << buf;
    }
    out << '\n' << "cases: " << a.case_count << ", failed: " << a.failure_count << '\n';
    return out.str();
}

/// Pairs each prediction study directory (containing manifest.json) with
/// the same-named directory under `truth_dir` (containing truth.json).
struct CasePaths {
    std::string id;
    std::filesystem::path manifest;
    std::filesystem::path truth;
};

inline std::vector<CasePaths> discover_cases(const std::filesystem::path& pred_dir,
                                             const std::filesystem::path& truth_dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(pred_dir, ec)) {
        throw Error(ErrorKind::Io, "prediction directory not found: " + pred_dir.string());
    }
    std::vector<CasePaths> cases;
    for (const auto& entry : std::filesystem::directory_iterator(pred_dir)) {
        const auto manifest = entry.path() / "manifest.json";
        if (entry.is_directory() && std::filesystem::exists(manifest)) {
            const auto id = entry.path().filename().string();
            cases.push_back({id, manifest, truth_dir / id / "truth.json"});
        }
    }
    std::sort(cases.begin(), cases.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return cases;
}

/// Evaluates cases in parallel; any load or parse error is rethrown after all workers finish.
inline EvaluationRun evaluate_all(const std::vector<CasePaths>& cases, const EvalOptions& opt = {},
                                  unsigned threads = 0) {
    EvaluationRun run;
    run.cases.resize(cases.size());
    std::vector<std::exception_ptr> errors(cases.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cases.size(); i = next++) {
            try {
                const auto truth = load_truth(cases[i].truth);
                const auto pred = load_heatmap(cases[i].manifest);
                run.cases[i] = evaluate_case(cases[i].id, pred, truth, opt);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, cases.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    run.aggregate = aggregate(run.cases);
    return run;
}

} // namespace ccd
