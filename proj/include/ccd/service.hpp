#pragma once

// Session state behind the surgeon-facing UI: open studies and their
// measurements, line editing, voice commands and snapshot persistence.
// Sessions live in memory only; snapshots are the sole persistence.

#include "ccd/error.hpp"
#include "ccd/geometry.hpp"
#include "ccd/heatmap.hpp"
#include "ccd/manifest.hpp"
#include "ccd/overlay.hpp"
#include "ccd/png_io.hpp"
#include "ccd/voice_fsm.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace ccd::service {

enum class ViewMode { Both, LeftZoom, RightZoom };
enum class DisplaySlot { Left, Right };
enum class LineKind { Neck, Shaft };

/// Which femur a study shows, from the sides of its channels.
enum class StudyKind { LeftFemur, RightFemur, BothFemurs };

inline std::string_view to_string(ViewMode v) {
    switch (v) {
    case ViewMode::Both: return "both";
    case ViewMode::LeftZoom: return "left_zoom";
    case ViewMode::RightZoom: return "right_zoom";
    }
    return "both";
}

inline std::string_view to_string(DisplaySlot s) { return s == DisplaySlot::Left ? "left" : "right"; }
inline std::string_view to_string(LineKind k) { return k == LineKind::Neck ? "neck" : "shaft"; }

inline std::string_view to_string(StudyKind k) {
    switch (k) {
    case StudyKind::LeftFemur: return "left_femur";
    case StudyKind::RightFemur: return "right_femur";
    case StudyKind::BothFemurs: return "both_femurs";
    }
    return "both_femurs";
}

inline std::optional<DisplaySlot> parse_slot(std::string_view s) {
    if (s == "left") return DisplaySlot::Left;
    if (s == "right") return DisplaySlot::Right;
    return std::nullopt;
}

inline std::optional<LineKind> parse_line_kind(std::string_view s) {
    if (s == "neck") return LineKind::Neck;
    if (s == "shaft") return LineKind::Shaft;
    return std::nullopt;
}

struct ServiceOptions {
    std::optional<std::filesystem::path> watch_folder;
    std::optional<std::filesystem::path> save_folder;
    double cutoff = kDefaultCutoff;
    RansacConfig ransac{};
    voice::FsmConfig fsm{};
};

struct SideResult {
    std::optional<FemurMeasurement> measurement;
    std::string unavailable_reason;  ///< set when measurement is absent
};

struct Study {
    std::filesystem::path manifest;
    Heatmap heatmap;
    StudyKind kind = StudyKind::BothFemurs;
    SideResult left;
    SideResult right;
    std::uint64_t opened_seq = 0;

    SideResult& side(Side s) { return s == Side::Left ? left : right; }
    const SideResult& side(Side s) const { return s == Side::Left ? left : right; }
};

struct Session {
    std::string id;
    std::vector<Study> studies;  ///< index 0 is display slot "left", index 1 slot "right"
    ViewMode view = ViewMode::Both;
    voice::VoiceState voice = voice::Sleeping{};
    std::optional<std::filesystem::file_time_type> folder_cursor;
    std::uint64_t open_counter = 0;
};

inline constexpr std::size_t kMaxOpenStudies = 2;

/// Rebuilds both lines from the display endpoints and recomputes the angle,
/// so the stored angle is always ccd_angle of the stored endpoints.
inline void sync_from_endpoints(FemurMeasurement& m) {
    m.neck_centerline = line_from_segment(m.neck_endpoints);
    m.shaft_centerline = line_from_segment(m.shaft_endpoints);
    m.ccd_degrees = ccd_angle(m.neck_centerline, m.shaft_centerline);
    m.degenerate = is_degenerate_ccd(m.ccd_degrees);
}

inline StudyKind classify(const Heatmap& heatmap) {
    const bool left = heatmap.has_side(Side::Left);
    const bool right = heatmap.has_side(Side::Right);
    if (left && !right) return StudyKind::LeftFemur;
    if (right && !left) return StudyKind::RightFemur;
    return StudyKind::BothFemurs;
}

/// Loads a study and measures every side whose centerline channels are
/// present. Per-side fit failures leave that side unavailable.
inline Study load_study(const std::filesystem::path& manifest, const ServiceOptions& options) {
    Study study;
    study.manifest = manifest;
    study.heatmap = load_heatmap(manifest);
    study.kind = classify(study.heatmap);
    for (Side side : kSides) {
        auto& result = study.side(side);
        if (!study.heatmap.find(neck_centerline(side)) || !study.heatmap.find(shaft_centerline(side))) {
            result.unavailable_reason = "no " + std::string(side_key(side)) + " centerline channels";
            continue;
        }
        try {
            auto m = measure_femur(study.heatmap, side, options.ransac, options.cutoff);
            try {
                sync_from_endpoints(m);
            } catch (const Error&) {
                // Endpoints collapsed to one point; keep the fitted lines.
            }
            result.measurement = std::move(m);
        } catch (const Error& e) {
            result.unavailable_reason = e.what();
        }
    }
    return study;
}

/// Orders open studies by display slot: with two studies the right-femur
/// study goes to slot "left" and the left-femur study to slot "right";
/// otherwise studies keep their opening order.
inline void arrange(std::vector<Study>& studies) {
    std::sort(studies.begin(), studies.end(), [](const Study& a, const Study& b) { return a.opened_seq < b.opened_seq; });
    if (studies.size() != 2) return;
    const auto& a = studies[0];
    const auto& b = studies[1];
    const bool swap = (b.kind == StudyKind::RightFemur && a.kind != StudyKind::RightFemur) ||
                      (a.kind == StudyKind::LeftFemur && b.kind != StudyKind::LeftFemur);
    if (swap) std::swap(studies[0], studies[1]);
}

/// Adds a loaded study; with two already open the oldest is replaced.
inline void install_study(Session& session, Study study) {
    study.opened_seq = ++session.open_counter;
    if (session.studies.size() >= kMaxOpenStudies) {
        auto oldest = std::min_element(session.studies.begin(), session.studies.end(),
                                       [](const Study& a, const Study& b) { return a.opened_seq < b.opened_seq; });
        session.studies.erase(oldest);
    }
    session.studies.push_back(std::move(study));
    arrange(session.studies);
}

inline void open_study(Session& session, const std::filesystem::path& manifest, const ServiceOptions& options) {
    install_study(session, load_study(manifest, options));
}

struct FolderEntry {
    std::filesystem::path path;
    std::filesystem::file_time_type mtime;
};

inline bool is_manifest_file(const std::filesystem::path& p) {
    const auto name = p.filename().string();
    constexpr std::string_view suffix = ".manifest.json";
    return name == "manifest.json" ||
           (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0);
}

/// Manifests under `folder` (recursively), oldest first; ties broken by path.
inline std::vector<FolderEntry> scan_manifests(const std::filesystem::path& folder) {
    std::error_code ec;
    if (!std::filesystem::is_directory(folder, ec)) {
        throw Error(ErrorKind::Io, "watch folder is not readable: " + folder.string());
    }
    std::vector<FolderEntry> out;
    std::filesystem::recursive_directory_iterator it(folder, ec), end;
    if (ec) throw Error(ErrorKind::Io, "cannot scan " + folder.string() + ": " + ec.message());
    for (; it != end; it.increment(ec)) {
        if (ec) throw Error(ErrorKind::Io, "cannot scan " + folder.string() + ": " + ec.message());
        if (it->is_regular_file() && is_manifest_file(it->path())) {
            out.push_back({it->path(), it->last_write_time()});
        }
    }
    std::sort(out.begin(), out.end(), [](const FolderEntry& a, const FolderEntry& b) {
        return a.mtime != b.mtime ? a.mtime < b.mtime : a.path < b.path;
    });
    return out;
}

/// First call picks the newest manifest; later calls the oldest one newer than the cursor.
inline std::optional<FolderEntry> next_manifest(const std::optional<std::filesystem::file_time_type>& cursor,
                                                const std::filesystem::path& folder) {
    const auto entries = scan_manifests(folder);
    if (entries.empty()) return std::nullopt;
    if (!cursor) return entries.back();
    for (const auto& e : entries) {
        if (e.mtime > *cursor) return e;
    }
    return std::nullopt;
}

struct OpenNextResult {
    std::optional<std::filesystem::path> opened;
    std::string warning;
};

inline OpenNextResult open_next(Session& session, const std::filesystem::path& watch_folder,
                                const ServiceOptions& options) {
    const auto next = next_manifest(session.folder_cursor, watch_folder);
    if (!next) return {std::nullopt, "no newer study in " + watch_folder.string()};
    open_study(session, next->path, options);
    session.folder_cursor = next->mtime;
    return {next->path, {}};
}

inline Study& study_at(Session& session, DisplaySlot slot) {
    const std::size_t index = slot == DisplaySlot::Left ? 0 : 1;
    if (index >= session.studies.size()) {
        throw Error(ErrorKind::NotFound, "no study in slot " + std::string(to_string(slot)));
    }
    return session.studies[index];
}

/// Moves one display endpoint and returns the recomputed CCD angle.
inline double update_line(Session& session, DisplaySlot slot, Side side, LineKind which, int endpoint,
                          Point2 position) {
    auto& result = study_at(session, slot).side(side);
    if (!result.measurement) {
        throw Error(ErrorKind::NotFound, "no " + std::string(side_key(side)) + " measurement in slot " +
                                             std::string(to_string(slot)));
    }
    if (endpoint != 0 && endpoint != 1) throw Error(ErrorKind::InvalidArgument, "endpoint index must be 0 or 1");
    if (!std::isfinite(position.x) || !std::isfinite(position.y)) {
        throw Error(ErrorKind::InvalidArgument, "endpoint coordinates must be finite");
    }
    FemurMeasurement edited = *result.measurement;
    Segment& seg = which == LineKind::Neck ? edited.neck_endpoints : edited.shaft_endpoints;
    (endpoint == 0 ? seg.first : seg.second) = position;
    if (seg.first == seg.second) throw Error(ErrorKind::Degenerate, "line endpoints coincide");
    sync_from_endpoints(edited);
    result.measurement = edited;
    return edited.ccd_degrees;
}

/// Current angle per femur side, taking the first study in slot order that has one.
inline std::optional<double> displayed_angle(const Session& session, Side side) {
    for (const auto& s : session.studies) {
        if (const auto& m = s.side(side).measurement) return m->ccd_degrees;
    }
    return std::nullopt;
}

// --- snapshots ---------------------------------------------------------------

struct Snapshot {
    std::string timestamp;  ///< ISO-8601 UTC with milliseconds
    std::filesystem::path image;
    std::filesystem::path sidecar;
    std::string note;
};

inline std::string iso_timestamp(std::chrono::system_clock::time_point t) {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
    const std::time_t secs = static_cast<std::time_t>(ms / 1000);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                  tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms % 1000));
    return buf;
}

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson point_json(Point2 p) { return ojson::array({p.x, p.y}); }
inline ojson segment_json(const Segment& s) { return ojson::array({point_json(s.first), point_json(s.second)}); }

inline std::string angle_text(std::optional<double> angle) {
    if (!angle) return "N/A";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1fd", *angle);
    return buf;
}

inline png::RgbImage study_canvas(const Study& study) {
    const int w = study.heatmap.width();
    const int h = study.heatmap.height();
    if (const auto& image = study.heatmap.image()) {
        try {
            const auto gray = png::read_gray(*image);
            if (gray.width == w && gray.height == h) return overlay::from_gray(gray);
        } catch (const Error&) {
            // fall through to a blank canvas
        }
    }
    return png::RgbImage(w, h, 24);
}

inline png::RgbImage render_study(const Study& study) {
    auto img = study_canvas(study);
    const double stroke = std::max(2.0, img.width / 256.0);
    for (Side side : kSides) {
        const auto& m = study.side(side).measurement;
        if (!m) continue;
        overlay::draw_segment(img, m->neck_endpoints.first, m->neck_endpoints.second, stroke, overlay::kNeckColor);
        overlay::draw_segment(img, m->shaft_endpoints.first, m->shaft_endpoints.second, stroke, overlay::kShaftColor);
        for (Point2 p : {m->neck_endpoints.first, m->neck_endpoints.second, m->shaft_endpoints.first,
                         m->shaft_endpoints.second}) {
            overlay::fill_disc(img, p, stroke * 1.5, overlay::kEndpointColor);
        }
    }
    const int scale = std::max(1, img.width / 256);
    // Right-side angle above the left-side angle.
    int y = 4 * scale;
    for (Side side : {Side::Right, Side::Left}) {
        if (!study.heatmap.has_side(side)) continue;
        const auto& m = study.side(side).measurement;
        const std::string label = std::string(side == Side::Right ? "R: " : "L: ") +
                                  angle_text(m ? std::optional<double>(m->ccd_degrees) : std::nullopt);
        overlay::draw_text(img, 4 * scale, y, label, scale, overlay::kTextColor);
        y += 9 * scale;
    }
    return img;
}

/// Studies visible in the current view, in slot order.
inline std::vector<const Study*> visible_studies(const Session& session) {
    std::vector<const Study*> out;
    for (const auto& s : session.studies) out.push_back(&s);
    if (out.size() == 2 && session.view != ViewMode::Both) {
        out.erase(out.begin() + (session.view == ViewMode::LeftZoom ? 1 : 0));
    }
    return out;
}

} // namespace detail

inline nlohmann::ordered_json measurement_json(const FemurMeasurement& m) {
    detail::ojson doc;
    doc["ccd"] = m.ccd_degrees;
    doc["degenerate"] = m.degenerate;
    doc["neck"] = detail::segment_json(m.neck_endpoints);
    doc["shaft"] = detail::segment_json(m.shaft_endpoints);
    doc["neck_inliers"] = m.neck_inliers;
    doc["shaft_inliers"] = m.shaft_inliers;
    return doc;
}

inline nlohmann::ordered_json study_json(const Study& study, DisplaySlot slot) {
    detail::ojson doc;
    doc["slot"] = to_string(slot);
    doc["manifest"] = study.manifest.string();
    doc["kind"] = to_string(study.kind);
    doc["width"] = study.heatmap.width();
    doc["height"] = study.heatmap.height();
    doc["image"] = study.heatmap.image() ? detail::ojson(study.heatmap.image()->string()) : detail::ojson(nullptr);
    detail::ojson sides;
    for (Side side : kSides) {
        const auto& r = study.side(side);
        if (r.measurement) {
            sides[std::string(side_key(side))] = measurement_json(*r.measurement);
        } else {
            sides[std::string(side_key(side))] = {{"unavailable", r.unavailable_reason}};
        }
    }
    doc["measurements"] = std::move(sides);
    return doc;
}

inline nlohmann::ordered_json session_json(const Session& session) {
    detail::ojson doc;
    doc["id"] = session.id;
    doc["view"] = to_string(session.view);
    doc["voice_state"] = voice::state_name(session.voice);
    doc["indicator"] = voice::to_string(voice::state_indicator(session.voice));
    doc["studies"] = detail::ojson::array();
    for (std::size_t i = 0; i < session.studies.size(); ++i) {
        doc["studies"].push_back(study_json(session.studies[i], i == 0 ? DisplaySlot::Left : DisplaySlot::Right));
    }
    detail::ojson angles;
    for (Side side : {Side::Right, Side::Left}) {
        const auto a = displayed_angle(session, side);
        angles[std::string(side_key(side))] = a ? detail::ojson(*a) : detail::ojson(nullptr);
    }
    doc["angles"] = std::move(angles);
    return doc;
}

/// Writes `snapshot_<timestamp>.png` (overlay) and `.json` (sidecar) into `save_folder`.
inline Snapshot save_snapshot(const Session& session, const std::string& note, const std::filesystem::path& save_folder,
                              std::chrono::system_clock::time_point when = std::chrono::system_clock::now()) {
    if (session.studies.empty()) throw Error(ErrorKind::InvalidArgument, "no open study to snapshot");
    std::error_code ec;
    std::filesystem::create_directories(save_folder, ec);
    if (ec || !std::filesystem::is_directory(save_folder)) {
        throw Error(ErrorKind::Io, "save folder is not writable: " + save_folder.string());
    }

    Snapshot snap;
    snap.timestamp = iso_timestamp(when);
    snap.note = note;
    std::string stem = "snapshot_" + snap.timestamp;
    std::replace(stem.begin(), stem.end(), ':', '-');
    std::string unique = stem;
    for (int n = 1; std::filesystem::exists(save_folder / (unique + ".png")) ||
                    std::filesystem::exists(save_folder / (unique + ".json"));
         ++n) {
        unique = stem + "_" + std::to_string(n);
    }
    snap.image = save_folder / (unique + ".png");
    snap.sidecar = save_folder / (unique + ".json");

    const auto studies = detail::visible_studies(session);
    std::vector<png::RgbImage> panels;
    int width = 0, height = 0;
    for (const auto* s : studies) {
        panels.push_back(detail::render_study(*s));
        width += panels.back().width;
        height = std::max(height, panels.back().height);
    }
    png::RgbImage canvas(width, height, 0);
    int x = 0;
    for (const auto& p : panels) {
        overlay::blit(canvas, p, x, 0);
        x += p.width;
    }
    png::write_rgb(snap.image, canvas);

    detail::ojson doc;
    doc["timestamp"] = snap.timestamp;
    doc["note"] = note;
    doc["image"] = snap.image.filename().string();
    doc["view"] = to_string(session.view);
    detail::ojson angles;
    for (Side side : {Side::Right, Side::Left}) {
        const auto a = displayed_angle(session, side);
        angles[std::string(side_key(side))] = a ? detail::ojson(*a) : detail::ojson(nullptr);
    }
    doc["angles"] = std::move(angles);
    doc["studies"] = detail::ojson::array();
    for (std::size_t i = 0; i < session.studies.size(); ++i) {
        doc["studies"].push_back(study_json(session.studies[i], i == 0 ? DisplaySlot::Left : DisplaySlot::Right));
    }
    std::ofstream out(snap.sidecar);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + snap.sidecar.string());
    out << doc.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::Io, "write failed: " + snap.sidecar.string());
    return snap;
}

// --- voice -------------------------------------------------------------------

struct VoiceOutcome {
    std::optional<voice::VoiceAction> action;
    std::string description;  ///< what was executed, empty if nothing
    std::string error;        ///< execution failure; the FSM keeps its post-step state
    std::optional<Snapshot> snapshot;
    std::optional<std::filesystem::path> opened;
};

/// Feeds one transcriber token (possibly several words) through the FSM and
/// executes any resulting action against the session.
inline VoiceOutcome process_voice_token(Session& session, std::string_view token, voice::Timestamp now,
                                        const ServiceOptions& options) {
    VoiceOutcome outcome;
    auto words = voice::split_tokens(token);
    for (const auto& word : words) {
        auto result = voice::step(session.voice, word, now, options.fsm);
        session.voice = std::move(result.state);
        if (!result.action) continue;
        outcome.action = result.action;
        try {
            std::visit(
                [&](const auto& a) {
                    using A = std::decay_t<decltype(a)>;
                    if constexpr (std::is_same_v<A, voice::ZoomLeft>) {
                        session.view = ViewMode::LeftZoom;
                        outcome.description = "view left_zoom";
                    } else if constexpr (std::is_same_v<A, voice::ZoomRight>) {
                        session.view = ViewMode::RightZoom;
                        outcome.description = "view right_zoom";
                    } else if constexpr (std::is_same_v<A, voice::ZoomOut>) {
                        session.view = ViewMode::Both;
                        outcome.description = "view both";
                    } else if constexpr (std::is_same_v<A, voice::OpenNext>) {
                        if (!options.watch_folder) throw Error(ErrorKind::InvalidArgument, "no watch folder configured");
                        auto r = open_next(session, *options.watch_folder, options);
                        outcome.opened = r.opened;
                        outcome.description = r.opened ? "opened " + r.opened->string() : r.warning;
                    } else {
                        if (!options.save_folder) throw Error(ErrorKind::InvalidArgument, "no save folder configured");
                        outcome.snapshot = save_snapshot(session, a.note, *options.save_folder);
                        outcome.description = "saved " + outcome.snapshot->image.string();
                    }
                },
                *result.action);
        } catch (const Error& e) {
            outcome.error = e.what();
        }
    }
    return outcome;
}

// --- multi-session service ---------------------------------------------------

using MonotonicClock = std::function<voice::Timestamp()>;

inline voice::Timestamp steady_now() {
    return std::chrono::duration_cast<voice::Timestamp>(std::chrono::steady_clock::now().time_since_epoch());
}

/// Thread-safe registry of sessions. Each session is guarded by its own mutex;
/// study loading and fitting happen before that mutex is taken.
class MeasureService {
public:
    explicit MeasureService(ServiceOptions options, MonotonicClock clock = steady_now)
        : options_(std::move(options)), clock_(std::move(clock)) {}

    ~MeasureService() { stop_ticker(); }

    MeasureService(const MeasureService&) = delete;
    MeasureService& operator=(const MeasureService&) = delete;

    const ServiceOptions& options() const { return options_; }

    std::string create_session() {
        std::unique_lock lock(registry_mutex_);
        char buf[32];
        std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(++session_counter_));
        auto entry = std::make_shared<Entry>();
        entry->session.id = buf;
        sessions_.emplace(buf, entry);
        return buf;
    }

    /// Runs `fn` with exclusive access to the session.
    template <typename Fn>
    decltype(auto) with_session(const std::string& id, Fn&& fn) {
        auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        return std::forward<Fn>(fn)(entry->session);
    }

    nlohmann::ordered_json state(const std::string& id) {
        return with_session(id, [](Session& s) { return session_json(s); });
    }

    void open(const std::string& id, const std::filesystem::path& manifest) {
        find(id);
        auto study = load_study(manifest, options_);
        with_session(id, [&](Session& s) { install_study(s, std::move(study)); });
    }

    OpenNextResult open_next(const std::string& id) {
        if (!options_.watch_folder) throw Error(ErrorKind::InvalidArgument, "no watch folder configured");
        const auto cursor = with_session(id, [](Session& s) { return s.folder_cursor; });
        const auto next = next_manifest(cursor, *options_.watch_folder);
        if (!next) return {std::nullopt, "no newer study in " + options_.watch_folder->string()};
        auto study = load_study(next->path, options_);
        with_session(id, [&](Session& s) {
            install_study(s, std::move(study));
            s.folder_cursor = next->mtime;
        });
        return {next->path, {}};
    }

    double update_line(const std::string& id, DisplaySlot slot, Side side, LineKind which, int endpoint, Point2 p) {
        return with_session(id, [&](Session& s) { return service::update_line(s, slot, side, which, endpoint, p); });
    }

    /// Returns the outcome together with the session state after the token.
    std::pair<VoiceOutcome, nlohmann::ordered_json> voice(const std::string& id, std::string_view token) {
        return with_session(id, [&](Session& s) {
            auto outcome = process_voice_token(s, token, clock_(), options_);
            return std::make_pair(std::move(outcome), session_json(s));
        });
    }

    Snapshot snapshot(const std::string& id, const std::string& note) {
        if (!options_.save_folder) throw Error(ErrorKind::InvalidArgument, "no save folder configured");
        return with_session(id, [&](Session& s) { return save_snapshot(s, note, *options_.save_folder); });
    }

    /// Applies the listening timeout to every session.
    void tick_all() {
        const auto now = clock_();
        std::vector<std::shared_ptr<Entry>> entries;
        {
            std::shared_lock lock(registry_mutex_);
            for (const auto& [id, e] : sessions_) entries.push_back(e);
        }
        for (const auto& e : entries) {
            std::lock_guard lock(e->mutex);
            e->session.voice = voice::tick(e->session.voice, now, options_.fsm);
        }
    }

    void start_ticker(std::chrono::milliseconds period = std::chrono::milliseconds(250)) {
        stop_ticker();
        ticker_ = std::jthread([this, period](std::stop_token stop) {
            std::mutex m;
            std::condition_variable_any cv;
            std::unique_lock lock(m);
            while (!stop.stop_requested()) {
                cv.wait_for(lock, stop, period, [] { return false; });
                if (stop.stop_requested()) break;
                tick_all();
            }
        });
    }

    void stop_ticker() {
        if (ticker_.joinable()) {
            ticker_.request_stop();
            ticker_.join();
        }
    }

private:
    struct Entry {
        std::mutex mutex;
        Session session;
    };

    std::shared_ptr<Entry> find(const std::string& id) {
        std::shared_lock lock(registry_mutex_);
        const auto it = sessions_.find(id);
        if (it == sessions_.end()) throw Error(ErrorKind::NotFound, "unknown session " + id);
        return it->second;
    }

    ServiceOptions options_;
    MonotonicClock clock_;
    std::shared_mutex registry_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::uint64_t session_counter_ = 0;
    std::jthread ticker_;
};

} // namespace ccd::service
