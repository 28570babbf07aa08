#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "supervisor/engine.hpp"
#include "supervisor/scenario.hpp"
#include "supervisor/text.hpp"

namespace supervisor {

/// Detection-time window for collision scenarios: a monitor may fire no
/// earlier than t_earliest and must fire by t_latest. +infinity means the
/// bound never becomes binding (a no-fire scenario).
struct SafetyEnvelope {
    double t_earliest{std::numeric_limits<double>::infinity()};
    double t_latest{std::numeric_limits<double>::infinity()};
};

class NotApplicableError : public std::runtime_error {
  public:
    explicit NotApplicableError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

/// Arc-length sampler along a trajectory's geometric path; extrapolates
/// straight past the final point.
class PathSampler {
  public:
    explicit PathSampler(const std::vector<TrajectoryPoint>& pts) : pts_(pts) {
        cum_.resize(pts.size(), 0.0);
        for (std::size_t i = 1; i < pts.size(); ++i) {
            cum_[i] = cum_[i - 1] + distance({pts[i - 1].x, pts[i - 1].y}, {pts[i].x, pts[i].y});
        }
    }

    Pose at(double dist) const {
        if (pts_.empty()) {
            return {};
        }
        if (dist <= 0.0 || pts_.size() == 1) {
            return pts_.front().pose();
        }
        if (dist >= cum_.back()) {
            const TrajectoryPoint& last = pts_.back();
            const double extra = dist - cum_.back();
            return {last.x + extra * std::cos(last.psi), last.y + extra * std::sin(last.psi), last.psi};
        }
        std::size_t i = 1;
        while (cum_[i] < dist) {
            ++i;
        }
        const double span = cum_[i] - cum_[i - 1];
        const double w = span > 0.0 ? (dist - cum_[i - 1]) / span : 0.0;
        const TrajectoryPoint& a = pts_[i - 1];
        const TrajectoryPoint& b = pts_[i];
        return {a.x + w * (b.x - a.x), a.y + w * (b.y - a.y),
                normalize_angle(a.psi + w * normalize_angle(b.psi - a.psi))};
    }

  private:
    const std::vector<TrajectoryPoint>& pts_;
    std::vector<double> cum_;
};

/// True when full braking along the planned path from this frame's state,
/// with every object holding its velocity, still ends in a frontal contact.
/// Responsibility is judged at first touch: an object that first contacts
/// from behind is the rammer and is ignored for the rest of the maneuver.
inline bool braking_collides(const ScenarioFrame& frame, const Scenario& sc, double dt) {
    const PathSampler path(frame.driving.points);
    double v = frame.driving.points.front().v;
    double travelled = 0.0;
    double t = 0.0;
    std::vector<char> dismissed(frame.snapshot.objects.size(), 0);
    while (true) {
        const Pose ego_pose = path.at(travelled);
        const ConvexPolygon ego_poly =
            footprint(ego_pose, sc.vehicle, sc.config.footprint_reference);
        const Vec2 fwd{std::cos(ego_pose.psi), std::sin(ego_pose.psi)};
        for (std::size_t o = 0; o < frame.snapshot.objects.size(); ++o) {
            if (dismissed[o]) {
                continue;
            }
            ObjectState obj = frame.snapshot.objects[o];
            obj.x += obj.v * std::cos(obj.psi) * t;
            obj.y += obj.v * std::sin(obj.psi) * t;
            if (polygons_overlap(ego_poly, footprint(obj))) {
                const bool ahead = dot(Vec2{obj.x, obj.y} - ego_pose.position(), fwd) > 0.0;
                if (ahead) {
                    return true;
                }
                dismissed[o] = 1;  // rear-end contact: the follower's fault
            }
        }
        if (v <= 0.0) {
            return false;
        }
        const double v_next = std::max(0.0, v - sc.vehicle.a_brake_max * dt);
        travelled += 0.5 * (v + v_next) * dt;
        v = v_next;
        t += dt;
    }
}

}  // namespace detail

/// Ground-truth detection window for dynamic-collision scenarios.
///
/// t_latest: first frame from which immediate full braking along the planned
/// path (objects at constant velocity, footprint overlap at dt resolution)
/// still collides. t_earliest: first frame where an object sits ahead within
/// the ego's abrupt-standstill braking distance v^2 / (2 a_brake_max),
/// measured as the forward bumper-to-bumper gap along the track.
///
/// Throws NotApplicableError for scenarios without objects; faults of other
/// kinds are graded against their direct formula oracles instead.
inline SafetyEnvelope ground_truth_envelope(const Scenario& sc, double dt = 0.01) {
    bool any_objects = false;
    for (const ScenarioFrame& f : sc.frames) {
        if (!f.snapshot.objects.empty()) {
            any_objects = true;
            break;
        }
    }
    if (!any_objects) {
        throw NotApplicableError("scenario '" + sc.name + "' has no dynamic objects");
    }

    SafetyEnvelope env;
    bool latest_found = false;
    for (const ScenarioFrame& frame : sc.frames) {
        if (std::isinf(env.t_earliest) && !frame.driving.points.empty()) {
            const double v0 = frame.driving.points.front().v;
            const double braking_distance = v0 * v0 / (2.0 * sc.vehicle.a_brake_max);
            const FrenetPosition ego_fp =
                sc.track.project(frame.snapshot.ego_pose.position(), sc.config.corridor);
            const ConvexPolygon ego_poly =
                footprint(frame.snapshot.ego_pose, sc.vehicle, sc.config.footprint_reference);
            const auto ego_ext = detail::frenet_extent(ego_poly, sc.track, ego_fp.s, sc.config.corridor);
            for (const ObjectState& obj : frame.snapshot.objects) {
                const auto obj_ext =
                    detail::frenet_extent(footprint(obj), sc.track, ego_fp.s, sc.config.corridor);
                if (obj_ext.s_min > ego_ext.s_max && obj_ext.s_min - ego_ext.s_max <= braking_distance) {
                    env.t_earliest = frame.t_abs;
                    break;
                }
            }
        }
        if (!latest_found && detail::braking_collides(frame, sc, dt)) {
            env.t_latest = frame.t_abs;
            latest_found = true;
        }
        if (latest_found && !std::isinf(env.t_earliest)) {
            break;
        }
    }
    return env;
}

struct ReplayResult {
    std::vector<Verdict> verdicts;
    std::vector<double> latency_us;  ///< per-step engine time, file I/O excluded
};

/// Feeds every frame through one engine instance (fresh state). Malformed
/// frame data classifies as unsafe inside the engine; a replay never aborts.
inline ReplayResult replay(const Scenario& sc) {
    ReplayResult out;
    out.verdicts.reserve(sc.frames.size());
    out.latency_us.reserve(sc.frames.size());
    SupervisorState state = reset();
    for (const ScenarioFrame& frame : sc.frames) {
        const auto t0 = std::chrono::steady_clock::now();
        StepResult step = evaluate_step(state, frame.snapshot, frame.driving, frame.emergency, sc.track,
                                        sc.vehicle, sc.rss, sc.rules, sc.config);
        const auto t1 = std::chrono::steady_clock::now();
        out.latency_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
        out.verdicts.push_back(std::move(step.verdict));
        state = std::move(step.state);
    }
    return out;
}

struct GradeResult {
    bool pass{false};
    std::string reason;
    std::optional<double> fire_time;  ///< first frame rated unsafe
};

/// Envelope grading: every frame strictly before t_earliest must rate safe,
/// every frame strictly after t_latest must rate unsafe, anything inside the
/// window is permitted. An infinite envelope is the no-fire case.
inline GradeResult grade(std::span<const Verdict> verdicts, const SafetyEnvelope& env) {
    GradeResult out;
    for (const Verdict& v : verdicts) {
        if (!v.s_tot && !out.fire_time) {
            out.fire_time = v.t_abs;
        }
        if (!v.s_tot && v.t_abs < env.t_earliest) {
            out.reason = "premature fire at t=" + detail::format_double(v.t_abs) +
                         " (earliest allowed " + detail::format_double(env.t_earliest) + ")";
            return out;
        }
        if (v.s_tot && v.t_abs > env.t_latest) {
            out.reason = "rated safe at t=" + detail::format_double(v.t_abs) +
                         " after required latest detection " + detail::format_double(env.t_latest);
            return out;
        }
    }
    if (std::isfinite(env.t_latest) && !out.fire_time) {
        out.reason = "missed: never fired, required by t=" + detail::format_double(env.t_latest);
        return out;
    }
    out.pass = true;
    out.reason = out.fire_time
                     ? "fired at t=" + detail::format_double(*out.fire_time) + " inside envelope"
                     : "no fire";
    return out;
}

/// Grades a replay against the scenario's expected outcome.
inline GradeResult grade_scenario(const Scenario& sc, std::span<const Verdict> verdicts) {
    switch (sc.expected.kind) {
        case ExpectedKind::NoFire:
            return grade(verdicts, SafetyEnvelope{});
        case ExpectedKind::FireInEnvelope:
            return grade(verdicts, ground_truth_envelope(sc));
        case ExpectedKind::FireSpecificCheck: {
            GradeResult out;
            for (const Verdict& v : verdicts) {
                if (!v.s_tot && !out.fire_time) {
                    out.fire_time = v.t_abs;
                }
                const CheckResult* driving = v.driving.find(sc.expected.check);
                const CheckResult* emergency = v.emergency.find(sc.expected.check);
                if ((driving && !driving->safe) || (emergency && !emergency->safe)) {
                    out.pass = true;
                    out.reason = "check " + sc.expected.check + " fired at t=" + detail::format_double(v.t_abs);
                    return out;
                }
            }
            out.reason = "check " + sc.expected.check + " never fired";
            return out;
        }
    }
    return {};
}

enum class FaultKind {
    FrictionExceed,  ///< scale every trajectory velocity (curvature fixed)
    BoundCollision,  ///< shift every trajectory point laterally [m]
    RuleViolation,   ///< add to every trajectory velocity [m/s]
};

struct FaultSpec {
    FaultKind kind{FaultKind::FrictionExceed};
    double value{1.0};  ///< scale for FrictionExceed, offset/addend otherwise
};

/// Mutates an all-safe scenario so that one specific check must fire, and
/// retags `expected` accordingly. Identity parameters (scale 1, offset 0,
/// addend 0) leave the scenario untouched.
inline Scenario inject_fault(const Scenario& sc, const FaultSpec& fault) {
    Scenario out = sc;
    const auto for_each_trajectory = [&out](auto&& fn) {
        for (ScenarioFrame& frame : out.frames) {
            fn(frame.driving);
            fn(frame.emergency);
        }
    };
    switch (fault.kind) {
        case FaultKind::FrictionExceed:
            if (fault.value == 1.0) {
                return out;
            }
            for_each_trajectory([&](Trajectory& traj) {
                for (TrajectoryPoint& p : traj.points) {
                    p.v *= fault.value;
                }
            });
            out.expected = {ExpectedKind::FireSpecificCheck, kCheckFriction};
            break;
        case FaultKind::BoundCollision:
            if (fault.value == 0.0) {
                return out;
            }
            for_each_trajectory([&](Trajectory& traj) {
                for (TrajectoryPoint& p : traj.points) {
                    FrenetPosition fp = out.track.project({p.x, p.y}, out.config.corridor);
                    fp.n += fault.value;
                    const Vec2 shifted = out.track.reconstruct(fp);
                    p.x = shifted.x;
                    p.y = shifted.y;
                }
            });
            out.expected = {ExpectedKind::FireSpecificCheck, kCheckStatic};
            break;
        case FaultKind::RuleViolation:
            if (fault.value == 0.0) {
                return out;
            }
            for_each_trajectory([&](Trajectory& traj) {
                for (TrajectoryPoint& p : traj.points) {
                    p.v += fault.value;
                }
            });
            out.expected = {ExpectedKind::FireSpecificCheck, kCheckRules};
            break;
    }
    return out;
}

}  // namespace supervisor
