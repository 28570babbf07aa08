// Authors the fixture corpus: two tracks plus eleven replay scenarios
// covering every check. Each scenario is replayed and graded before it is
// written, so a regeneration that breaks an expectation fails loudly.
//
// Usage: gen_fixtures [output_root]   (default ./data)

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "supervisor/supervisor.hpp"

using namespace supervisor;

namespace {

constexpr double kFrameDt = 0.1;  // 10 Hz replay rate

// ---------------------------------------------------------------- tracks --

TrackMap make_straight_track() {
    std::vector<TrackStation> stations;
    for (double s = 0.0; s <= 600.0 + 1e-9; s += 2.0) {
        stations.push_back({s, {s, 0.0}, 6.0, 6.0, 0.0});
    }
    return TrackMap::from_stations(std::move(stations));
}

// Stadium circuit: two 150 m straights joined by 30 m radius half circles.
struct OvalSpec {
    double straight = 150.0;
    double radius = 30.0;
    double length() const { return 2.0 * straight + 2.0 * kPi * radius; }

    void pose_at(double s, double& x, double& y, double& psi, double& kappa) const {
        const double arc = kPi * radius;
        if (s < straight) {
            x = s;
            y = 0.0;
            psi = 0.0;
            kappa = 0.0;
        } else if (s < straight + arc) {
            const double phi = (s - straight) / radius;
            x = straight + radius * std::sin(phi);
            y = radius - radius * std::cos(phi);
            psi = phi;
            kappa = 1.0 / radius;
        } else if (s < 2.0 * straight + arc) {
            const double d = s - straight - arc;
            x = straight - d;
            y = 2.0 * radius;
            psi = kPi;
            kappa = 0.0;
        } else {
            const double phi = (s - 2.0 * straight - arc) / radius;
            x = -radius * std::sin(phi);
            y = radius + radius * std::cos(phi);
            psi = normalize_angle(kPi + phi);
            kappa = 1.0 / radius;
        }
    }
};

TrackMap make_oval_track(const OvalSpec& oval) {
    std::vector<TrackStation> stations;
    double x, y, psi, kappa;
    for (double s = 0.0; s < oval.length() - 1.0; s += 2.0) {
        oval.pose_at(s, x, y, psi, kappa);
        stations.push_back({s, {x, y}, 6.0, 6.0, 0.0});
    }
    stations.push_back({oval.length(), {0.0, 0.0}, 6.0, 6.0, 0.0});  // closing sample
    return TrackMap::from_stations(std::move(stations));
}

// ------------------------------------------------------------ lap profile --

// Speed plan for the oval: 15 m/s through the arcs (76 % lateral usage at
// mu = 1), accelerate at +3 on the straights up to 26 m/s, brake at -6 so the
// arc speed is reached 5 m before entry.
struct LapProfile {
    OvalSpec oval;
    double v_arc = 15.0;
    double v_top = 26.0;
    double a_up = 3.0;
    double a_down = 6.0;
    double buffer = 5.0;

    void state_at(double s_in, double& v, double& ax) const {
        const double arc = kPi * oval.radius;
        double s = std::fmod(s_in, oval.length());
        if (s < 0.0) {
            s += oval.length();
        }
        double rel;
        if (s < oval.straight) {
            rel = s;
        } else if (s < oval.straight + arc) {
            v = v_arc;
            ax = 0.0;
            return;
        } else if (s < 2.0 * oval.straight + arc) {
            rel = s - oval.straight - arc;
        } else {
            v = v_arc;
            ax = 0.0;
            return;
        }
        // straight of length `straight`, entered at v_arc, left at v_arc
        const double s_flat = (v_top * v_top - v_arc * v_arc) / (2.0 * a_up);
        const double brake_len = (v_top * v_top - v_arc * v_arc) / (2.0 * a_down);
        const double s_brake = oval.straight - buffer - brake_len;
        if (rel < s_flat && rel < s_brake) {
            v = std::sqrt(v_arc * v_arc + 2.0 * a_up * rel);
            ax = a_up;
        } else if (rel < s_brake) {
            v = v_top;
            ax = 0.0;
        } else if (rel < oval.straight - buffer) {
            const double v2 = v_top * v_top - 2.0 * a_down * (rel - s_brake);
            v = std::sqrt(std::max(v_arc * v_arc, v2));
            ax = -a_down;
        } else {
            v = v_arc;
            ax = 0.0;
        }
    }
};

TrajectoryPoint lap_point(const LapProfile& lap, double s, double t_rel) {
    TrajectoryPoint p;
    double x, y, psi, kappa;
    lap.oval.pose_at(std::fmod(s, lap.oval.length()), x, y, psi, kappa);
    double v, ax;
    lap.state_at(s, v, ax);
    p.t = t_rel;
    p.x = x;
    p.y = y;
    p.psi = psi;
    p.kappa = kappa;
    p.v = v;
    p.ax = ax;
    return p;
}

/// Arc positions of the lap on a fixed time grid (dt = kFrameDt).
std::vector<double> lap_s_table(const LapProfile& lap, int steps) {
    std::vector<double> table(steps + 1);
    double s = 0.0;
    for (int i = 0; i <= steps; ++i) {
        table[i] = s;
        double v, ax;
        lap.state_at(s, v, ax);  // midpoint step
        double vm, axm;
        lap.state_at(s + 0.5 * v * kFrameDt, vm, axm);
        s += vm * kFrameDt;
    }
    return table;
}

/// Friction-aware emergency stop along the lap path from arc position s0.
Trajectory lap_emergency(const LapProfile& lap, double s0, double mu) {
    Trajectory traj;
    traj.kind = TrajectoryKind::Emergency;
    double s = s0;
    double v;
    double ax_unused;
    lap.state_at(s0, v, ax_unused);
    double t = 0.0;
    const double usage = 0.90 * mu * kGravity;
    while (true) {
        TrajectoryPoint p = lap_point(lap, s, t);
        p.v = v;
        if (v <= 0.0) {
            p.v = 0.0;
            p.ax = 0.0;
            traj.points.push_back(p);
            break;
        }
        const double a_lat = v * v * p.kappa;
        const double a_brake =
            std::min(9.0, std::sqrt(std::max(1.0, usage * usage - a_lat * a_lat)));
        p.ax = -a_brake;
        traj.points.push_back(p);
        const double v_next = std::max(0.0, v - a_brake * kFrameDt);
        s += 0.5 * (v + v_next) * kFrameDt;
        v = v_next;
        t += kFrameDt;
    }
    return traj;
}

// ------------------------------------------------------- scenario helpers --

Scenario base_scenario(const std::string& name, const std::string& track_path, const TrackMap& track) {
    Scenario sc;
    sc.name = name;
    sc.track_path = track_path;
    sc.track = track;
    sc.vehicle.mass = 1200.0;
    sc.vehicle.length = 4.7;
    sc.vehicle.width = 1.9;
    sc.vehicle.reaction_time = 0.5;
    sc.vehicle.a_brake_max = 10.0;
    sc.vehicle.turn_radius_min = 5.0;
    sc.vehicle.a_accel_engine =
        AccelCurve{{{0.0, 5.0}, {20.0, 5.0}, {40.0, 3.0}, {60.0, 1.5}, {80.0, 0.5}}};
    sc.rss.rho = 0.5;
    sc.rss.a_r_acc = 5.0;
    sc.rss.a_r_br = 8.0;
    sc.rss.a_f_br = 10.0;
    sc.rss.lat_rho = 0.5;
    sc.rss.a_lat_acc = 3.0;
    sc.rss.a_lat_br = 4.0;
    sc.rss.mu_lat_margin = 0.1;
    sc.rules.v_max = 80.0;
    sc.rules.rear_responsibility_enabled = true;
    sc.expected = {ExpectedKind::NoFire, {}};
    return sc;
}

Trajectory straight_driving(double x0, double y, double v, int points) {
    Trajectory traj;
    traj.kind = TrajectoryKind::Driving;
    for (int i = 0; i < points; ++i) {
        TrajectoryPoint p;
        p.t = i / 10.0;
        p.x = x0 + v * p.t;
        p.y = y;
        p.v = v;
        traj.points.push_back(p);
    }
    return traj;
}

Trajectory straight_emergency(double x0, double y, double v0, double decel) {
    Trajectory traj;
    traj.kind = TrajectoryKind::Emergency;
    double x = x0;
    double v = v0;
    double t = 0.0;
    while (true) {
        TrajectoryPoint p;
        p.t = t;
        p.x = x;
        p.y = y;
        p.v = v;
        p.ax = v > 0.0 ? -decel : 0.0;
        traj.points.push_back(p);
        if (v <= 0.0) {
            break;
        }
        const double v_next = std::max(0.0, v - decel * kFrameDt);
        x += 0.5 * (v + v_next) * kFrameDt;
        v = v_next;
        t += kFrameDt;
    }
    traj.points.back().v = 0.0;
    return traj;
}

// --------------------------------------------------------------- nofire --

Scenario make_nofire_lap(const TrackMap& oval_track) {
    const OvalSpec oval;
    const LapProfile lap{oval};
    Scenario sc = base_scenario("nofire_lap", "../tracks/oval.csv", oval_track);

    const int frames = 240;
    const int horizon = 30;
    const auto s_table = lap_s_table(lap, frames + horizon + 1);
    for (int i = 0; i < frames; ++i) {
        ScenarioFrame frame;
        frame.t_abs = i / 10.0;
        frame.snapshot.t_abs = frame.t_abs;
        frame.snapshot.mu = 1.0;
        const TrajectoryPoint here = lap_point(lap, s_table[i], 0.0);
        frame.snapshot.ego_pose = {here.x, here.y, here.psi};
        frame.driving.kind = TrajectoryKind::Driving;
        for (int k = 0; k < horizon; ++k) {
            frame.driving.points.push_back(lap_point(lap, s_table[i + k], k / 10.0));
        }
        frame.emergency = lap_emergency(lap, s_table[i], 1.0);
        sc.frames.push_back(std::move(frame));
    }
    return sc;
}

// --------------------------------------------------------------- cutoff --

// Overtake-and-cut-off: the opponent approaches close behind in lane
// (rated safe through the rear-responsibility exemption while both distance
// margins dip), swings out, passes, cuts back in well ahead and then brakes
// until the closing ego can no longer keep the worst-case gap.
struct CutoffScript {
    double ego_x(double t) const { return 50.0 + 20.0 * t; }

    double obj_x(double t) const {
        if (t <= 9.0) {
            return 20.0 + 26.0 * t;
        }
        const double d = std::min(t, 15.0) - 9.0;
        double x = 20.0 + 26.0 * 9.0 + 26.0 * d - 1.5 * d * d;
        if (t > 15.0) {
            x += 8.0 * (t - 15.0);
        }
        return x;
    }

    double obj_v_lon(double t) const { return t <= 9.0 ? 26.0 : std::max(8.0, 26.0 - 3.0 * (t - 9.0)); }

    double obj_n(double t) const {
        if (t < 3.0) {
            return 2.8;
        }
        if (t < 4.0) {
            return 2.8 + 0.7 * (t - 3.0);
        }
        if (t < 7.5) {
            return 3.5;
        }
        if (t < 9.0) {
            return 3.5 * (9.0 - t) / 1.5;
        }
        return 0.0;
    }

    double obj_n_rate(double t) const {
        if (t >= 3.0 && t < 4.0) {
            return 0.7;
        }
        if (t >= 7.5 && t < 9.0) {
            return -3.5 / 1.5;
        }
        return 0.0;
    }
};

Scenario make_cutoff(const TrackMap& straight) {
    Scenario sc = base_scenario("cutoff_overtake", "../tracks/straight.csv", straight);
    sc.expected = {ExpectedKind::FireInEnvelope, {}};
    const CutoffScript script;
    for (int i = 0; i <= 150; ++i) {
        const double t = i / 10.0;
        ScenarioFrame frame;
        frame.t_abs = t;
        frame.snapshot.t_abs = t;
        frame.snapshot.mu = 1.0;
        frame.snapshot.ego_pose = {script.ego_x(t), 0.0, 0.0};
        ObjectState obj;
        obj.id = 1;
        const double v_lon = script.obj_v_lon(t);
        const double n_rate = script.obj_n_rate(t);
        obj.x = script.obj_x(t);
        obj.y = script.obj_n(t);
        obj.psi = std::atan2(n_rate, v_lon);
        obj.v = std::hypot(v_lon, n_rate);
        obj.length = 4.7;
        obj.width = 1.9;
        frame.snapshot.objects.push_back(obj);
        frame.driving = straight_driving(script.ego_x(t), 0.0, 20.0, 31);
        frame.emergency = straight_emergency(script.ego_x(t), 0.0, 20.0, 8.0);
        sc.frames.push_back(std::move(frame));
    }
    return sc;
}

// ------------------------------------------------------- small scenarios --

Scenario make_pose_mismatch(const TrackMap& straight) {
    Scenario sc = base_scenario("pose_mismatch", "../tracks/straight.csv", straight);
    sc.expected = {ExpectedKind::FireSpecificCheck, kCheckPoseMatch};
    for (int i = 0; i < 20; ++i) {
        const double t = i / 10.0;
        ScenarioFrame frame;
        frame.t_abs = t;
        frame.snapshot.t_abs = t;
        frame.snapshot.mu = 1.0;
        frame.snapshot.ego_pose = {100.0 + 20.0 * t, 0.0, 0.0};
        // planner output drifted a lane away from the measured pose
        frame.driving = straight_driving(100.0 + 20.0 * t, 4.0, 20.0, 31);
        frame.emergency = straight_emergency(100.0 + 20.0 * t, 4.0, 20.0, 8.0);
        sc.frames.push_back(std::move(frame));
    }
    return sc;
}

Scenario make_curvature_limit(const TrackMap& straight) {
    Scenario sc = base_scenario("curvature_limit", "../tracks/straight.csv", straight);
    sc.expected = {ExpectedKind::FireSpecificCheck, kCheckDynLimits};
    for (int i = 0; i < 20; ++i) {
        const double t = i / 10.0;
        ScenarioFrame frame;
        frame.t_abs = t;
        frame.snapshot.t_abs = t;
        frame.snapshot.mu = 1.0;
        frame.snapshot.ego_pose = {100.0 + 2.0 * t, 0.0, 0.0};
        frame.driving = straight_driving(100.0 + 2.0 * t, 0.0, 2.0, 31);
        for (int k = 10; k < 16; ++k) {
            frame.driving.points[k].kappa = 0.25;  // tighter than the 5 m turn radius allows
        }
        frame.emergency = straight_emergency(100.0 + 2.0 * t, 0.0, 2.0, 4.0);
        sc.frames.push_back(std::move(frame));
    }
    return sc;
}

Scenario make_engine_limit(const TrackMap& straight) {
    Scenario sc = base_scenario("engine_limit", "../tracks/straight.csv", straight);
    sc.expected = {ExpectedKind::FireSpecificCheck, kCheckDynLimits};
    for (int i = 0; i < 20; ++i) {
        const double t = i / 10.0;
        ScenarioFrame frame;
        frame.t_abs = t;
        frame.snapshot.t_abs = t;
        frame.snapshot.mu = 1.0;
        frame.snapshot.ego_pose = {100.0 + 15.0 * t, 0.0, 0.0};
        frame.driving = straight_driving(100.0 + 15.0 * t, 0.0, 15.0, 31);
        for (int k = 5; k < 10; ++k) {
            frame.driving.points[k].ax = 8.0;  // engine curve allows 5 at this speed
        }
        frame.emergency = straight_emergency(100.0 + 15.0 * t, 0.0, 15.0, 8.0);
        sc.frames.push_back(std::move(frame));
    }
    return sc;
}

Scenario make_emergency_not_stopping(const TrackMap& straight) {
    Scenario sc = base_scenario("emergency_not_stopping", "../tracks/straight.csv", straight);
    sc.expected = {ExpectedKind::FireSpecificCheck, kCheckValidInput};
    for (int i = 0; i < 20; ++i) {
        const double t = i / 10.0;
        ScenarioFrame frame;
        frame.t_abs = t;
        frame.snapshot.t_abs = t;
        frame.snapshot.mu = 1.0;
        frame.snapshot.ego_pose = {100.0 + 20.0 * t, 0.0, 0.0};
        frame.driving = straight_driving(100.0 + 20.0 * t, 0.0, 20.0, 31);
        frame.emergency = straight_emergency(100.0 + 20.0 * t, 0.0, 20.0, 8.0);
        frame.emergency.points.back().v = 0.5;  // never reaches standstill
        sc.frames.push_back(std::move(frame));
    }
    return sc;
}

Scenario make_rear_exempt(const TrackMap& straight, bool rule_enabled) {
    Scenario sc = base_scenario(rule_enabled ? "rear_exempt" : "rear_exempt_disabled",
                                "../tracks/straight.csv", straight);
    sc.rules.rear_responsibility_enabled = rule_enabled;
    sc.expected = rule_enabled ? Expectation{ExpectedKind::NoFire, {}}
                               : Expectation{ExpectedKind::FireSpecificCheck, kCheckRssLon};
    for (int i = 0; i < 30; ++i) {
        const double t = i / 10.0;
        ScenarioFrame frame;
        frame.t_abs = t;
        frame.snapshot.t_abs = t;
        frame.snapshot.mu = 1.0;
        const double ego_x = 100.0 + 20.0 * t;
        frame.snapshot.ego_pose = {ego_x, 0.0, 0.0};
        ObjectState obj;  // tailgating at matched speed, 1.3 m bumper gap
        obj.id = 1;
        obj.x = ego_x - 6.0;
        obj.y = 0.0;
        obj.v = 20.0;
        obj.length = 4.7;
        obj.width = 1.9;
        frame.snapshot.objects.push_back(obj);
        frame.driving = straight_driving(ego_x, 0.0, 20.0, 31);
        frame.emergency = straight_emergency(ego_x, 0.0, 20.0, 8.0);
        sc.frames.push_back(std::move(frame));
    }
    return sc;
}

// ----------------------------------------------------------------- main --

struct CheckFailure {};

void verify(const Scenario& sc) {
    const ReplayResult res = replay(sc);
    const GradeResult g = grade_scenario(sc, res.verdicts);
    std::printf("  %-24s %s %s\n", sc.name.c_str(), g.pass ? "[ok]" : "[FAIL]", g.reason.c_str());
    if (!g.pass) {
        throw CheckFailure{};
    }
}

}  // namespace

int main(int argc, char** argv) {
    namespace fs = std::filesystem;
    const fs::path root = argc > 1 ? argv[1] : "data";
    fs::create_directories(root / "tracks");
    fs::create_directories(root / "scenarios");

    const TrackMap straight = make_straight_track();
    const TrackMap oval = make_oval_track(OvalSpec{});
    straight.save_csv((root / "tracks" / "straight.csv").string());
    oval.save_csv((root / "tracks" / "oval.csv").string());
    std::printf("tracks: straight %.1f m, oval %.1f m (closed=%d)\n", straight.total_length(),
                oval.total_length(), oval.closed());

    try {
        std::vector<Scenario> corpus;
        corpus.push_back(make_nofire_lap(oval));

        // the lap's worst friction usage must stay at or below 90 %
        double worst_usage = 0.0;
        for (const auto& frame : corpus[0].frames) {
            for (const auto* traj : {&frame.driving, &frame.emergency}) {
                for (const auto& p : traj->points) {
                    const double demand = std::hypot(p.ax, p.v * p.v * p.kappa);
                    worst_usage = std::max(worst_usage, demand / kGravity);
                }
            }
        }
        std::printf("lap friction usage: %.3f\n", worst_usage);
        if (worst_usage > 0.905) {
            std::fprintf(stderr, "lap exceeds intended friction budget\n");
            return 1;
        }

        corpus.push_back(make_cutoff(straight));
        corpus.push_back(inject_fault(corpus[0], {FaultKind::FrictionExceed, 1.3}));
        corpus.back().name = "friction_exceed";
        corpus.push_back(inject_fault(corpus[0], {FaultKind::BoundCollision, 7.0}));
        corpus.back().name = "bound_collision";
        corpus.push_back(inject_fault(corpus[0], {FaultKind::RuleViolation, 60.0}));
        corpus.back().name = "rule_violation";
        corpus.push_back(make_pose_mismatch(straight));
        corpus.push_back(make_curvature_limit(straight));
        corpus.push_back(make_engine_limit(straight));
        corpus.push_back(make_emergency_not_stopping(straight));
        corpus.push_back(make_rear_exempt(straight, true));
        corpus.push_back(make_rear_exempt(straight, false));

        std::printf("verifying %zu scenarios:\n", corpus.size());
        for (const Scenario& sc : corpus) {
            verify(sc);
        }

        // extra detail for the cutoff scenario
        const Scenario& cutoff = corpus[1];
        const SafetyEnvelope env = ground_truth_envelope(cutoff);
        const ReplayResult res = replay(cutoff);
        const GradeResult g = grade(res.verdicts, env);
        bool dip = false;
        for (const Verdict& v : res.verdicts) {
            const CheckResult* lon = v.driving.find(kCheckRssLon);
            const CheckResult* lat = v.driving.find(kCheckRssLat);
            dip = dip || (v.s_tot && lon && lat && lon->margin < 0.0 && lat->margin < 0.0);
        }
        std::printf("cutoff: envelope [%.2f, %.2f], fire %.2f, exemption dip %d\n", env.t_earliest,
                    env.t_latest, g.fire_time.value_or(-1.0), dip);
        if (!g.pass || !dip || !(env.t_earliest < env.t_latest)) {
            std::fprintf(stderr, "cutoff scenario does not reproduce the intended pattern\n");
            return 1;
        }

        for (const Scenario& sc : corpus) {
            save_scenario(sc, (root / "scenarios" / (sc.name + ".scn")).string());
        }
        std::printf("wrote %zu scenarios to %s\n", corpus.size(), (root / "scenarios").string().c_str());
    } catch (const CheckFailure&) {
        std::fprintf(stderr, "scenario self-check failed\n");
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
