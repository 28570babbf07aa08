#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "supervisor/engine.hpp"
#include "supervisor/text.hpp"
#include "supervisor/track.hpp"
#include "supervisor/types.hpp"

namespace supervisor {

class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

enum class ExpectedKind {
    NoFire,            ///< every frame must rate safe
    FireInEnvelope,    ///< first unsafe rating must land in the ground-truth envelope
    FireSpecificCheck, ///< the named check must fire at least once
};

struct Expectation {
    ExpectedKind kind{ExpectedKind::NoFire};
    std::string check;  ///< check id for FireSpecificCheck

    std::string to_string() const {
        switch (kind) {
            case ExpectedKind::NoFire: return "NoFire";
            case ExpectedKind::FireInEnvelope: return "FireInEnvelope";
            case ExpectedKind::FireSpecificCheck: return "FireSpecificCheck:" + check;
        }
        return "?";
    }

    static Expectation from_string(const std::string& s) {
        if (s == "NoFire") {
            return {ExpectedKind::NoFire, {}};
        }
        if (s == "FireInEnvelope") {
            return {ExpectedKind::FireInEnvelope, {}};
        }
        const std::string prefix = "FireSpecificCheck:";
        if (s.rfind(prefix, 0) == 0 && s.size() > prefix.size()) {
            return {ExpectedKind::FireSpecificCheck, s.substr(prefix.size())};
        }
        throw ParseError("unknown expected outcome: '" + s + "'");
    }
};

/// One replay step: what the engine sees at one timestamp.
struct ScenarioFrame {
    double t_abs{0.0};
    PerceptionSnapshot snapshot;
    Trajectory driving;
    Trajectory emergency;
};

struct Scenario {
    std::string name;
    std::string track_path;  ///< as written in the file
    TrackMap track;
    VehicleParameters vehicle;
    RssParameters rss;
    RuleSet rules;
    SupervisorConfig config;
    Expectation expected;
    std::vector<ScenarioFrame> frames;
};

namespace detail {

inline std::string engine_curve_to_string(const AccelCurve& curve) {
    std::string out;
    for (std::size_t i = 0; i < curve.knots.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += format_double(curve.knots[i].v) + ":" + format_double(curve.knots[i].a);
    }
    return out;
}

inline AccelCurve engine_curve_from_string(const std::string& s, const std::string& where) {
    AccelCurve curve;
    for (const std::string& item : split(s, ',')) {
        const auto kv = split(item, ':');
        if (kv.size() != 2) {
            throw ParseError(where + ": engine curve entries must be v:a");
        }
        curve.knots.push_back({parse_double(kv[0], where), parse_double(kv[1], where)});
    }
    if (curve.knots.empty()) {
        throw ParseError(where + ": empty engine curve");
    }
    for (std::size_t i = 1; i < curve.knots.size(); ++i) {
        if (!(curve.knots[i].v > curve.knots[i - 1].v)) {
            throw ParseError(where + ": engine curve velocities must increase");
        }
    }
    return curve;
}

inline std::string points_to_string(const std::vector<TrajectoryPoint>& pts) {
    std::string out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const TrajectoryPoint& p = pts[i];
        if (i > 0) {
            out += '|';
        }
        out += format_double(p.t) + ',' + format_double(p.x) + ',' + format_double(p.y) + ',' +
               format_double(p.psi) + ',' + format_double(p.kappa) + ',' + format_double(p.v) + ',' +
               format_double(p.ax);
    }
    return out;
}

inline std::vector<TrajectoryPoint> points_from_string(const std::string& s, const std::string& where) {
    std::vector<TrajectoryPoint> pts;
    if (trim(s).empty()) {
        return pts;
    }
    for (const std::string& item : split(s, '|')) {
        const auto f = split(item, ',');
        if (f.size() != 7) {
            throw ParseError(where + ": trajectory point needs 7 fields (t,x,y,psi,kappa,v,ax)");
        }
        TrajectoryPoint p;
        p.t = parse_double(f[0], where);
        p.x = parse_double(f[1], where);
        p.y = parse_double(f[2], where);
        p.psi = parse_double(f[3], where);
        p.kappa = parse_double(f[4], where);
        p.v = parse_double(f[5], where);
        p.ax = parse_double(f[6], where);
        pts.push_back(p);
    }
    return pts;
}

inline std::string objects_to_string(const std::vector<ObjectState>& objects) {
    std::string out = "[";
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const ObjectState& o = objects[i];
        if (i > 0) {
            out += ';';
        }
        out += std::to_string(o.id) + ',' + format_double(o.x) + ',' + format_double(o.y) + ',' +
               format_double(o.psi) + ',' + format_double(o.v) + ',' + format_double(o.length) + ',' +
               format_double(o.width);
    }
    return out + "]";
}

/// Strips a named `key=[...]` wrapper and returns the bracket contents.
inline std::string bracket_payload(const std::string& field, const std::string& key,
                                   const std::string& where) {
    const std::string t = trim(field);
    const std::string prefix = key + "=[";
    if (t.rfind(prefix, 0) != 0 || t.back() != ']') {
        throw ParseError(where + ": expected " + key + "=[...], got '" + t + "'");
    }
    return t.substr(prefix.size(), t.size() - prefix.size() - 1);
}

}  // namespace detail

/// Applies one `section.key=value` header assignment. Shared by the parser
/// and by command-line overrides.
inline void apply_scenario_setting(Scenario& sc, const std::string& key, const std::string& value,
                                   const std::string& where) {
    using detail::parse_double;
    using detail::parse_long;
    if (key == "name") {
        sc.name = value;
    } else if (key == "track") {
        sc.track_path = value;
    } else if (key == "expected") {
        sc.expected = Expectation::from_string(value);
    } else if (key == "vehicle.mass") {
        sc.vehicle.mass = parse_double(value, where);
    } else if (key == "vehicle.length") {
        sc.vehicle.length = parse_double(value, where);
    } else if (key == "vehicle.width") {
        sc.vehicle.width = parse_double(value, where);
    } else if (key == "vehicle.reaction_time") {
        sc.vehicle.reaction_time = parse_double(value, where);
    } else if (key == "vehicle.a_brake_max") {
        sc.vehicle.a_brake_max = parse_double(value, where);
    } else if (key == "vehicle.turn_radius_min") {
        sc.vehicle.turn_radius_min = parse_double(value, where);
    } else if (key == "vehicle.engine_curve") {
        sc.vehicle.a_accel_engine = detail::engine_curve_from_string(value, where);
    } else if (key == "rss.rho") {
        sc.rss.rho = parse_double(value, where);
    } else if (key == "rss.a_r_acc") {
        sc.rss.a_r_acc = parse_double(value, where);
    } else if (key == "rss.a_r_br") {
        sc.rss.a_r_br = parse_double(value, where);
    } else if (key == "rss.a_f_br") {
        sc.rss.a_f_br = parse_double(value, where);
    } else if (key == "rss.lat_rho") {
        sc.rss.lat_rho = parse_double(value, where);
    } else if (key == "rss.a_lat_acc") {
        sc.rss.a_lat_acc = parse_double(value, where);
    } else if (key == "rss.a_lat_br") {
        sc.rss.a_lat_br = parse_double(value, where);
    } else if (key == "rss.mu_lat_margin") {
        sc.rss.mu_lat_margin = parse_double(value, where);
    } else if (key == "rules.v_max") {
        sc.rules.v_max = parse_double(value, where);
    } else if (key == "rules.rear_responsibility") {
        sc.rules.rear_responsibility_enabled = parse_long(value, where) != 0;
    } else if (key == "config.pose_match_threshold") {
        sc.config.pose_match_threshold = parse_double(value, where);
    } else if (key == "config.pose_match_window") {
        sc.config.pose_match_window = static_cast<int>(parse_long(value, where));
    } else if (key == "config.corridor") {
        sc.config.corridor = parse_double(value, where);
    } else if (key == "config.reverify_stored_emergency") {
        sc.config.reverify_stored_emergency = parse_long(value, where) != 0;
    } else if (key == "config.multi_lap_gaps") {
        sc.config.multi_lap_gaps = parse_long(value, where) != 0;
    } else if (key == "config.rear_axle_reference") {
        sc.config.footprint_reference =
            parse_long(value, where) != 0 ? FootprintReference::RearAxle : FootprintReference::Center;
    } else {
        throw ParseError(where + ": unknown header key '" + key + "'");
    }
}

/// Scenario text format: `key=value` header lines, a `frames:` separator,
/// then one frame per line:
///   t_abs; ego_x; ego_y; ego_psi; mu; objects=[id,x,y,psi,v,len,wid;...];
///   driving=[t,x,y,psi,kappa,v,ax|...]; emergency=[...]
/// `#` starts a comment line. The referenced track CSV is resolved against
/// `base_dir`.
inline Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir) {
    Scenario sc;
    std::string line;
    int line_no = 0;
    bool in_frames = false;
    bool saw_track = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const std::string where = "line " + std::to_string(line_no);
        if (!in_frames) {
            if (t == "frames:") {
                in_frames = true;
                if (!saw_track) {
                    throw ParseError("scenario header is missing the track key");
                }
                const std::filesystem::path track_file =
                    std::filesystem::path(sc.track_path).is_absolute()
                        ? std::filesystem::path(sc.track_path)
                        : base_dir / sc.track_path;
                sc.track = TrackMap::load_csv(track_file.string());
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos) {
                throw ParseError(where + ": expected key=value or frames:");
            }
            const std::string key = detail::trim(t.substr(0, eq));
            const std::string value = detail::trim(t.substr(eq + 1));
            if (key == "track") {
                saw_track = true;
            }
            apply_scenario_setting(sc, key, value, where);
            continue;
        }

        const std::vector<std::string> fields = detail::split_bracket_aware(t, ';');
        if (fields.size() != 8) {
            throw ParseError(where + ": frame needs 8 fields, got " + std::to_string(fields.size()));
        }
        ScenarioFrame frame;
        frame.t_abs = detail::parse_double(fields[0], where);
        frame.snapshot.t_abs = frame.t_abs;
        frame.snapshot.ego_pose.x = detail::parse_double(fields[1], where);
        frame.snapshot.ego_pose.y = detail::parse_double(fields[2], where);
        frame.snapshot.ego_pose.psi = detail::parse_double(fields[3], where);
        frame.snapshot.mu = detail::parse_double(fields[4], where);
        const std::string object_payload = detail::bracket_payload(fields[5], "objects", where);
        if (!detail::trim(object_payload).empty()) {
            for (const std::string& obj_str : detail::split(object_payload, ';')) {
                const auto f = detail::split(obj_str, ',');
                if (f.size() != 7) {
                    throw ParseError(where + ": object needs 7 fields (id,x,y,psi,v,len,wid)");
                }
                ObjectState o;
                o.id = static_cast<int>(detail::parse_long(f[0], where));
                o.x = detail::parse_double(f[1], where);
                o.y = detail::parse_double(f[2], where);
                o.psi = detail::parse_double(f[3], where);
                o.v = detail::parse_double(f[4], where);
                o.length = detail::parse_double(f[5], where);
                o.width = detail::parse_double(f[6], where);
                o.a_brake_max = sc.rss.a_f_br;
                o.a_accel_max = sc.rss.a_r_acc;
                frame.snapshot.objects.push_back(o);
            }
        }
        frame.driving.kind = TrajectoryKind::Driving;
        frame.driving.points = detail::points_from_string(detail::bracket_payload(fields[6], "driving", where), where);
        frame.emergency.kind = TrajectoryKind::Emergency;
        frame.emergency.points =
            detail::points_from_string(detail::bracket_payload(fields[7], "emergency", where), where);
        sc.frames.push_back(std::move(frame));
    }
    if (!in_frames) {
        throw ParseError("scenario has no frames: section");
    }

    // Structural validation. Trajectory content (monotone stamps, emergency
    // stop state) is deliberately left to the engine, which classifies such
    // faults at replay time instead of rejecting the file.
    if (sc.frames.empty()) {
        throw ValidationError("scenario has no frames");
    }
    for (std::size_t i = 0; i < sc.frames.size(); ++i) {
        if (i > 0 && !(sc.frames[i].t_abs > sc.frames[i - 1].t_abs)) {
            throw ValidationError("frame " + std::to_string(i) + ": t_abs not strictly increasing");
        }
        if (sc.frames[i].driving.points.empty() || sc.frames[i].emergency.points.empty()) {
            throw ValidationError("frame " + std::to_string(i) + ": missing trajectory candidate");
        }
    }
    return sc;
}

/// Resolves a scenario path: as given, then against SUPERVISOR_SCENARIO_PATH.
inline std::filesystem::path resolve_scenario_path(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::exists(path)) {
        return fs::path(path);
    }
    if (const char* root = std::getenv("SUPERVISOR_SCENARIO_PATH")) {
        const fs::path candidate = fs::path(root) / path;
        if (fs::exists(candidate)) {
            return candidate;
        }
    }
    return fs::path(path);
}

inline Scenario load_scenario(const std::string& path) {
    const std::filesystem::path resolved = resolve_scenario_path(path);
    std::ifstream in(resolved);
    if (!in) {
        throw ParseError("cannot open scenario file: " + path);
    }
    return parse_scenario(in, resolved.parent_path());
}

inline void write_scenario(const Scenario& sc, std::ostream& out) {
    using detail::format_double;
    out << "name=" << sc.name << '\n';
    out << "track=" << sc.track_path << '\n';
    out << "expected=" << sc.expected.to_string() << '\n';
    out << "vehicle.mass=" << format_double(sc.vehicle.mass) << '\n';
    out << "vehicle.length=" << format_double(sc.vehicle.length) << '\n';
    out << "vehicle.width=" << format_double(sc.vehicle.width) << '\n';
    out << "vehicle.reaction_time=" << format_double(sc.vehicle.reaction_time) << '\n';
    out << "vehicle.a_brake_max=" << format_double(sc.vehicle.a_brake_max) << '\n';
    out << "vehicle.turn_radius_min=" << format_double(sc.vehicle.turn_radius_min) << '\n';
    out << "vehicle.engine_curve=" << detail::engine_curve_to_string(sc.vehicle.a_accel_engine) << '\n';
    out << "rss.rho=" << format_double(sc.rss.rho) << '\n';
    out << "rss.a_r_acc=" << format_double(sc.rss.a_r_acc) << '\n';
    out << "rss.a_r_br=" << format_double(sc.rss.a_r_br) << '\n';
    out << "rss.a_f_br=" << format_double(sc.rss.a_f_br) << '\n';
    out << "rss.lat_rho=" << format_double(sc.rss.lat_rho) << '\n';
    out << "rss.a_lat_acc=" << format_double(sc.rss.a_lat_acc) << '\n';
    out << "rss.a_lat_br=" << format_double(sc.rss.a_lat_br) << '\n';
    out << "rss.mu_lat_margin=" << format_double(sc.rss.mu_lat_margin) << '\n';
    if (sc.rules.v_max) {
        out << "rules.v_max=" << format_double(*sc.rules.v_max) << '\n';
    }
    out << "rules.rear_responsibility=" << (sc.rules.rear_responsibility_enabled ? 1 : 0) << '\n';
    out << "config.pose_match_threshold=" << format_double(sc.config.pose_match_threshold) << '\n';
    out << "config.pose_match_window=" << sc.config.pose_match_window << '\n';
    out << "config.corridor=" << format_double(sc.config.corridor) << '\n';
    out << "config.reverify_stored_emergency=" << (sc.config.reverify_stored_emergency ? 1 : 0) << '\n';
    out << "config.multi_lap_gaps=" << (sc.config.multi_lap_gaps ? 1 : 0) << '\n';
    out << "config.rear_axle_reference="
        << (sc.config.footprint_reference == FootprintReference::RearAxle ? 1 : 0) << '\n';
    out << "frames:\n";
    for (const ScenarioFrame& f : sc.frames) {
        out << format_double(f.t_abs) << ';' << format_double(f.snapshot.ego_pose.x) << ';'
            << format_double(f.snapshot.ego_pose.y) << ';' << format_double(f.snapshot.ego_pose.psi) << ';'
            << format_double(f.snapshot.mu) << ';' << "objects=" << detail::objects_to_string(f.snapshot.objects)
            << ';' << "driving=[" << detail::points_to_string(f.driving.points) << "];emergency=["
            << detail::points_to_string(f.emergency.points) << "]\n";
    }
}

inline void save_scenario(const Scenario& sc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot write scenario file: " + path);
    }
    write_scenario(sc, out);
}

}  // namespace supervisor
