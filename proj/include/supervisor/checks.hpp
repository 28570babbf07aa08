#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "supervisor/track.hpp"
#include "supervisor/types.hpp"

namespace supervisor {

// Stable check identifiers; these double as score CSV column names.
inline constexpr const char* kCheckStatic = "s_stat";
inline constexpr const char* kCheckRssLon = "r_lon";
inline constexpr const char* kCheckRssLat = "r_lat";
inline constexpr const char* kCheckPoseMatch = "pose_match";
inline constexpr const char* kCheckFriction = "a_comb";
inline constexpr const char* kCheckDynLimits = "dyn_limits";
inline constexpr const char* kCheckRules = "rules";
inline constexpr const char* kCheckValidInput = "valid_input";

/// Worst-case kinematic parameters for the distance-keeping model. The rear
/// role accelerates for the reaction time, then brakes with its minimum
/// assured deceleration; the front role brakes with its maximum one.
struct RssParameters {
    double rho{0.5};           ///< reaction time [s]
    double a_r_acc{5.0};       ///< max rear acceleration during reaction [m/s^2]
    double a_r_br{8.0};        ///< minimum assured rear braking [m/s^2]
    double a_f_br{10.0};       ///< maximum front braking [m/s^2]
    double lat_rho{0.5};       ///< lateral reaction time [s]
    double a_lat_acc{3.0};     ///< max lateral acceleration during reaction [m/s^2]
    double a_lat_br{4.0};      ///< lateral braking [m/s^2]
    double mu_lat_margin{0.1}; ///< fixed lateral fluctuation margin [m]
};

/// Outcome of one evaluation metric. `margin` is the signed slack in the
/// check's own units; `safe` is the Boolean classification. For most checks
/// safe == (margin >= 0); the dynamic-object pair may be safe with negative
/// margins (responsibility exemption or single-axis violation).
struct CheckResult {
    std::string name;
    double margin{0.0};
    bool safe{true};
    int worst_index{-1};  ///< trajectory point index of the minimum margin, -1 if n/a
};

/// Minimum required longitudinal gap so that a rear vehicle at v_rear never
/// reaches a braking front vehicle at v_front, assuming the rear accelerates
/// for the reaction time and then brakes with its assured deceleration.
/// A gap d is safe iff d > result (strict).
inline double rss_lon_min_gap(double v_front, double v_rear, const RssParameters& rss) {
    const double v_rear_peak = v_rear + rss.rho * rss.a_r_acc;
    const double d = v_rear * rss.rho + 0.5 * rss.a_r_acc * rss.rho * rss.rho +
                     v_rear_peak * v_rear_peak / (2.0 * rss.a_r_br) -
                     v_front * v_front / (2.0 * rss.a_f_br);
    return std::max(0.0, d);
}

/// Lateral analogue: both agents drift toward each other for lat_rho, then
/// brake laterally to rest. Inputs are closing velocities (positive = moving
/// toward the other agent); each agent's share is clamped at zero.
inline double rss_lat_min_gap(double v_toward_1, double v_toward_2, const RssParameters& rss) {
    const auto share = [&rss](double v) {
        const double v_peak = std::max(0.0, v + rss.lat_rho * rss.a_lat_acc);
        const double d = v * rss.lat_rho + 0.5 * rss.a_lat_acc * rss.lat_rho * rss.lat_rho +
                         v_peak * v_peak / (2.0 * rss.a_lat_br);
        return std::max(0.0, d);
    };
    return rss.mu_lat_margin + share(v_toward_1) + share(v_toward_2);
}

/// Forward collision check against the track bounds: minimum footprint
/// clearance over all trajectory points. Safe iff no point crosses a bound.
inline CheckResult check_static_collision(const Trajectory& traj, const TrackMap& map,
                                          const VehicleParameters& params,
                                          FootprintReference ref = FootprintReference::Center,
                                          double corridor = TrackMap::kDefaultCorridor) {
    CheckResult res{kCheckStatic, std::numeric_limits<double>::infinity(), true, -1};
    for (std::size_t i = 0; i < traj.points.size(); ++i) {
        const double d = signed_distance_to_bounds(footprint(traj.points[i].pose(), params, ref), map, corridor);
        if (d < res.margin) {
            res.margin = d;
            res.worst_index = static_cast<int>(i);
        }
    }
    res.safe = res.margin >= 0.0;
    return res;
}

/// The planned start must lie close to the measured ego pose; the matching
/// point may be any of the first `match_window` samples.
inline CheckResult check_pose_match(const Trajectory& traj, const Vec2& ego_pose, double threshold,
                                    int match_window) {
    CheckResult res{kCheckPoseMatch, -std::numeric_limits<double>::infinity(), false, -1};
    double best = std::numeric_limits<double>::infinity();
    const std::size_t window = std::min<std::size_t>(traj.points.size(), static_cast<std::size_t>(std::max(1, match_window)));
    for (std::size_t i = 0; i < window; ++i) {
        const double d = distance({traj.points[i].x, traj.points[i].y}, ego_pose);
        if (d < best) {
            best = d;
            res.worst_index = static_cast<int>(i);
        }
    }
    res.margin = threshold - best;
    res.safe = res.margin >= 0.0;
    return res;
}

/// Total tire force demand at a trajectory point: longitudinal plus
/// centripetal (a_lat = v^2 * kappa), combined as a vector magnitude.
inline double combined_accel_force(const TrajectoryPoint& p, double mass) {
    const double a_lat = p.v * p.v * p.kappa;
    return mass * std::sqrt(p.ax * p.ax + a_lat * a_lat);
}

namespace detail {

inline CheckResult friction_result(const Trajectory& traj, const VehicleParameters& params,
                                   const double* mu_per_point, std::size_t mu_count, double mu_scalar) {
    CheckResult res{kCheckFriction, std::numeric_limits<double>::infinity(), true, -1};
    const double f_normal = params.mass * kGravity;  // no aerodynamic downforce
    for (std::size_t i = 0; i < traj.points.size(); ++i) {
        const double mu = mu_per_point != nullptr && i < mu_count ? mu_per_point[i] : mu_scalar;
        const double m = (mu * f_normal - combined_accel_force(traj.points[i], params.mass)) / f_normal;
        if (m < res.margin) {
            res.margin = m;
            res.worst_index = static_cast<int>(i);
        }
    }
    res.safe = res.margin >= 0.0;
    return res;
}

}  // namespace detail

/// Friction-circle check: demand m*sqrt(ax^2 + (v^2 k)^2) against mu*m*g at
/// every point. Margin is normalized by m*g (dimensionless g-slack), which
/// keeps scores comparable across vehicles without changing classification.
inline CheckResult check_friction(const Trajectory& traj, double mu, const VehicleParameters& params) {
    return detail::friction_result(traj, params, nullptr, 0, mu);
}

/// Per-point friction profile; entries beyond the profile fall back to the
/// scalar value.
inline CheckResult check_friction(const Trajectory& traj, std::span<const double> mu_profile,
                                  double mu_fallback, const VehicleParameters& params) {
    return detail::friction_result(traj, params, mu_profile.data(), mu_profile.size(), mu_fallback);
}

/// Physical feasibility: curvature against the minimum turn radius,
/// acceleration against braking hardware and the engine curve. Margin is the
/// smallest normalized slack of the three.
inline CheckResult check_dynamic_limits(const Trajectory& traj, const VehicleParameters& params) {
    CheckResult res{kCheckDynLimits, std::numeric_limits<double>::infinity(), true, -1};
    const double kappa_max = 1.0 / params.turn_radius_min;
    for (std::size_t i = 0; i < traj.points.size(); ++i) {
        const TrajectoryPoint& p = traj.points[i];
        const double slack_kappa = (kappa_max - std::abs(p.kappa)) / kappa_max;
        const double slack_brake = (p.ax + params.a_brake_max) / params.a_brake_max;
        const double a_eng = params.a_accel_engine.at(p.v);
        const double denom = a_eng > 1e-9 ? a_eng : 1.0;
        const double slack_accel = (a_eng - p.ax) / denom;
        const double m = std::min({slack_kappa, slack_brake, slack_accel});
        if (m < res.margin) {
            res.margin = m;
            res.worst_index = static_cast<int>(i);
        }
    }
    res.safe = res.margin >= 0.0;
    return res;
}

/// Scalar rules of conduct, evaluated per point. With every rule disabled the
/// conjunction is vacuous: margin is +infinity.
inline CheckResult check_rules(const Trajectory& traj, const RuleSet& rules) {
    CheckResult res{kCheckRules, std::numeric_limits<double>::infinity(), true, -1};
    if (rules.v_max) {
        const double v_max = *rules.v_max;
        for (std::size_t i = 0; i < traj.points.size(); ++i) {
            const double m = (v_max - traj.points[i].v) / v_max;
            if (m < res.margin) {
                res.margin = m;
                res.worst_index = static_cast<int>(i);
            }
        }
    }
    res.safe = res.margin >= 0.0;
    return res;
}

struct DynamicObjectsResult {
    CheckResult lon;
    CheckResult lat;
};

namespace detail {

struct FrenetExtent {
    double s_min, s_max;
    double n_min, n_max;
    double s_center() const { return 0.5 * (s_min + s_max); }
    double n_center() const { return 0.5 * (n_min + n_max); }
};

/// Frenet bounding interval of a footprint; s values are unwrapped relative
/// to `anchor_s` so circuit seams do not split the extent.
inline FrenetExtent frenet_extent(const ConvexPolygon& poly, const TrackMap& map, double anchor_s,
                                  double corridor) {
    FrenetExtent e{1e300, -1e300, 1e300, -1e300};
    for (const Vec2& c : poly.corners) {
        const FrenetPosition fp = map.project(c, corridor);
        const double s = anchor_s + map.delta_s(anchor_s, fp.s);
        e.s_min = std::min(e.s_min, s);
        e.s_max = std::max(e.s_max, s);
        e.n_min = std::min(e.n_min, fp.n);
        e.n_max = std::max(e.n_max, fp.n);
    }
    return e;
}

inline double interval_gap(double a_min, double a_max, double b_min, double b_max) {
    return std::max(0.0, std::max(b_min - a_max, a_min - b_max));
}

}  // namespace detail

/// Worst-case distance keeping against every dynamic object along the
/// trajectory horizon. Objects are propagated with constant velocity along
/// their heading; the worst case (reaction, acceleration, braking) lives in
/// the gap formulas, not in the prediction.
///
/// A point is dangerous only when longitudinal AND lateral gaps are both
/// below their minima and the ego is not exempt. With the rear-responsibility
/// rule active, the ego is exempt from an object for the whole step when its
/// rear edge is strictly ahead of that object's front edge at the step's
/// start (the rear vehicle is liable, and the rating reflects the current
/// configuration). Margins report the worst per-axis slack over all points
/// and objects, so they can be negative while the pair is still safe.
inline DynamicObjectsResult check_dynamic_objects(const Trajectory& traj,
                                                  std::span<const ObjectState> objects,
                                                  const TrackMap& map, const RssParameters& rss,
                                                  const RuleSet& rules,
                                                  const VehicleParameters& params,
                                                  FootprintReference ref = FootprintReference::Center,
                                                  double corridor = TrackMap::kDefaultCorridor,
                                                  bool multi_lap_gaps = false) {
    DynamicObjectsResult out{
        {kCheckRssLon, std::numeric_limits<double>::infinity(), true, -1},
        {kCheckRssLat, std::numeric_limits<double>::infinity(), true, -1},
    };
    if (traj.points.empty() || objects.empty()) {
        return out;
    }

    // On a circuit the default gap is the forward one along the driving
    // direction: an agent in the rear half of the lap reads as far ahead.
    // The minimum of the two directed gaps applies only in multi-lap mode.
    const auto forward_shift = [&](const detail::FrenetExtent& ego, detail::FrenetExtent& other) {
        if (map.closed() && !multi_lap_gaps && other.s_max < ego.s_min) {
            other.s_min += map.total_length();
            other.s_max += map.total_length();
        }
    };

    // Exemption from the current configuration, per object.
    std::vector<bool> exempt(objects.size(), false);
    const TrajectoryPoint& start = traj.points.front();
    const FrenetPosition ego_start_fp = map.project({start.x, start.y}, corridor);
    const detail::FrenetExtent ego_start =
        detail::frenet_extent(footprint(start.pose(), params, ref), map, ego_start_fp.s, corridor);
    if (rules.rear_responsibility_enabled) {
        for (std::size_t o = 0; o < objects.size(); ++o) {
            detail::FrenetExtent obj_now =
                detail::frenet_extent(footprint(objects[o]), map, ego_start_fp.s, corridor);
            forward_shift(ego_start, obj_now);
            exempt[o] = ego_start.s_min > obj_now.s_max;
        }
    }

    bool dangerous = false;
    int danger_index = -1;
    for (std::size_t i = 0; i < traj.points.size(); ++i) {
        const TrajectoryPoint& p = traj.points[i];
        const FrenetPosition ego_fp = map.project({p.x, p.y}, corridor);
        const detail::FrenetExtent ego =
            detail::frenet_extent(footprint(p.pose(), params, ref), map, ego_fp.s, corridor);
        const double ego_lat_v = p.v * std::sin(normalize_angle(p.psi - map.heading_at(ego_fp.s)));

        for (std::size_t o = 0; o < objects.size(); ++o) {
            ObjectState obj = objects[o];
            obj.x += obj.v * std::cos(obj.psi) * p.t;
            obj.y += obj.v * std::sin(obj.psi) * p.t;
            detail::FrenetExtent other;
            try {
                other = detail::frenet_extent(footprint(obj), map, ego_fp.s, corridor);
            } catch (const OutOfCorridorError&) {
                if (p.t <= 0.0) {
                    throw;  // the measured object itself is off the map
                }
                continue;  // constant-velocity prediction left the mapped region
            }
            forward_shift(ego, other);

            const double d_lon = detail::interval_gap(ego.s_min, ego.s_max, other.s_min, other.s_max);
            const bool ego_is_rear = ego.s_center() <= other.s_center();
            const double v_front = ego_is_rear ? obj.v : p.v;
            const double v_rear = ego_is_rear ? p.v : obj.v;
            const double lon_min = rss_lon_min_gap(v_front, v_rear, rss);
            const bool lon_ok = d_lon > lon_min;

            const double d_lat = detail::interval_gap(ego.n_min, ego.n_max, other.n_min, other.n_max);
            const double obj_lat_v =
                obj.v * std::sin(normalize_angle(obj.psi - map.heading_at(map.wrap_s(other.s_center()))));
            const bool ego_is_left = ego.n_center() > other.n_center();
            const double toward_ego = ego_is_left ? -ego_lat_v : ego_lat_v;
            const double toward_obj = ego_is_left ? obj_lat_v : -obj_lat_v;
            const double lat_min = rss_lat_min_gap(toward_ego, toward_obj, rss);
            const bool lat_ok = d_lat > lat_min;

            if (d_lon - lon_min < out.lon.margin) {
                out.lon.margin = d_lon - lon_min;
                out.lon.worst_index = static_cast<int>(i);
            }
            if (d_lat - lat_min < out.lat.margin) {
                out.lat.margin = d_lat - lat_min;
                out.lat.worst_index = static_cast<int>(i);
            }
            if (!lon_ok && !lat_ok && !exempt[o] && !dangerous) {
                dangerous = true;
                danger_index = static_cast<int>(i);
            }
        }
    }
    out.lon.safe = !dangerous;
    out.lat.safe = !dangerous;
    if (dangerous) {
        out.lon.worst_index = danger_index;
        out.lat.worst_index = danger_index;
    }
    return out;
}

}  // namespace supervisor
