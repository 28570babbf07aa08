#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "supervisor/geometry.hpp"

namespace supervisor {

/// One stamped state of a planned trajectory. Times are offsets from the
/// trajectory start, positions are map-frame meters, angles radians.
struct TrajectoryPoint {
    double t{0.0};      ///< time offset from trajectory start [s]
    double x{0.0};      ///< [m]
    double y{0.0};      ///< [m]
    double psi{0.0};    ///< heading [rad]
    double kappa{0.0};  ///< path curvature [1/m]
    double v{0.0};      ///< longitudinal velocity [m/s], >= 0
    double ax{0.0};     ///< longitudinal acceleration [m/s^2]

    Pose pose() const { return {x, y, psi}; }
};

enum class TrajectoryKind { Driving, Emergency };

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    TrajectoryKind kind{TrajectoryKind::Driving};
};

/// Piecewise-linear velocity -> max positive acceleration map. Knots must be
/// sorted by velocity; lookups clamp at both ends.
struct AccelCurve {
    struct Knot {
        double v{0.0};
        double a{0.0};
    };
    std::vector<Knot> knots;

    double at(double v) const {
        if (knots.empty()) {
            return 0.0;
        }
        if (v <= knots.front().v) {
            return knots.front().a;
        }
        if (v >= knots.back().v) {
            return knots.back().a;
        }
        for (std::size_t i = 1; i < knots.size(); ++i) {
            if (v <= knots[i].v) {
                const Knot& lo = knots[i - 1];
                const Knot& hi = knots[i];
                const double span = hi.v - lo.v;
                const double w = span > 0.0 ? (v - lo.v) / span : 0.0;
                return lo.a + w * (hi.a - lo.a);
            }
        }
        return knots.back().a;
    }
};

inline constexpr double kGravity = 9.81;  // [m/s^2], no aerodynamic downforce modeled

struct VehicleParameters {
    double mass{1200.0};           ///< [kg]
    double length{4.7};            ///< footprint length [m]
    double width{1.9};             ///< footprint width [m]
    double reaction_time{0.5};     ///< rho [s]
    double a_brake_max{10.0};      ///< max deceleration magnitude [m/s^2]
    AccelCurve a_accel_engine{{{0.0, 5.0}, {20.0, 5.0}, {40.0, 3.0}, {60.0, 1.5}, {80.0, 0.5}}};
    double turn_radius_min{5.0};   ///< [m]
};

/// Snapshot of another traffic participant.
struct ObjectState {
    int id{0};
    double x{0.0};
    double y{0.0};
    double psi{0.0};
    double v{0.0};  ///< speed along heading [m/s], >= 0
    double length{4.7};
    double width{1.9};
    double a_brake_max{10.0};
    double a_accel_max{5.0};

    Pose pose() const { return {x, y, psi}; }
};

/// Scalar rules of conduct. A disabled rule never constrains.
struct RuleSet {
    std::optional<double> v_max;            ///< [m/s]; nullopt = rule disabled
    bool rear_responsibility_enabled{true};  ///< rear vehicle is liable for rear-end conflicts
};

enum class ViolationCode {
    TooFewPoints,
    NonFiniteField,
    NegativeTime,
    NonMonotoneTime,
    NegativeVelocity,
    EmergencyNotStopping,
};

struct Violation {
    ViolationCode code{ViolationCode::TooFewPoints};
    int index{0};  ///< offending point index (or last index for trajectory-level issues)

    std::string to_string() const {
        const char* name = "";
        switch (code) {
            case ViolationCode::TooFewPoints: name = "TooFewPoints"; break;
            case ViolationCode::NonFiniteField: name = "NonFiniteField"; break;
            case ViolationCode::NegativeTime: name = "NegativeTime"; break;
            case ViolationCode::NonMonotoneTime: name = "NonMonotoneTime"; break;
            case ViolationCode::NegativeVelocity: name = "NegativeVelocity"; break;
            case ViolationCode::EmergencyNotStopping: name = "EmergencyNotStopping"; break;
        }
        return std::string(name) + "@" + std::to_string(index);
    }
};

/// Input hygiene for trajectories. Total: returns findings as data, never
/// throws, tolerates NaNs.
inline std::vector<Violation> validate_trajectory(const Trajectory& traj) {
    std::vector<Violation> out;
    const auto& pts = traj.points;
    if (pts.size() < 2) {
        out.push_back({ViolationCode::TooFewPoints, static_cast<int>(pts.empty() ? 0 : pts.size() - 1)});
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const TrajectoryPoint& p = pts[i];
        const bool finite = std::isfinite(p.t) && std::isfinite(p.x) && std::isfinite(p.y) &&
                            std::isfinite(p.psi) && std::isfinite(p.kappa) && std::isfinite(p.v) &&
                            std::isfinite(p.ax);
        if (!finite) {
            out.push_back({ViolationCode::NonFiniteField, static_cast<int>(i)});
            continue;  // comparisons against NaN below would be meaningless
        }
        if (p.t < 0.0) {
            out.push_back({ViolationCode::NegativeTime, static_cast<int>(i)});
        }
        if (i > 0 && std::isfinite(pts[i - 1].t) && !(p.t > pts[i - 1].t)) {
            out.push_back({ViolationCode::NonMonotoneTime, static_cast<int>(i)});
        }
        if (p.v < 0.0) {
            out.push_back({ViolationCode::NegativeVelocity, static_cast<int>(i)});
        }
    }
    if (traj.kind == TrajectoryKind::Emergency && !pts.empty()) {
        const double v_end = pts.back().v;
        if (!(v_end == 0.0)) {
            out.push_back({ViolationCode::EmergencyNotStopping, static_cast<int>(pts.size() - 1)});
        }
    }
    return out;
}

enum class FootprintReference {
    Center,    ///< pose refers to the footprint's geometric center
    RearAxle,  ///< pose refers to a rear-axle point, 0.25 * length behind center
};

/// Vehicle footprint at a pose as an oriented rectangle (corners CCW).
inline ConvexPolygon footprint(const Pose& pose, const VehicleParameters& params,
                               FootprintReference ref = FootprintReference::Center) {
    Pose center = pose;
    if (ref == FootprintReference::RearAxle) {
        const double offset = 0.25 * params.length;
        center.x += offset * std::cos(pose.psi);
        center.y += offset * std::sin(pose.psi);
    }
    return oriented_rectangle(center, params.length, params.width);
}

inline ConvexPolygon footprint(const ObjectState& obj) {
    return oriented_rectangle(obj.pose(), obj.length, obj.width);
}

}  // namespace supervisor
