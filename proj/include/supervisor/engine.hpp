#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "supervisor/checks.hpp"
#include "supervisor/track.hpp"
#include "supervisor/types.hpp"

namespace supervisor {

/// One timestamp of perception input.
struct PerceptionSnapshot {
    double t_abs{0.0};  ///< absolute time [s]
    Pose ego_pose;
    std::vector<ObjectState> objects;
    double mu{1.0};                  ///< track-wide friction coefficient
    std::vector<double> mu_profile;  ///< optional per-point profile, falls back to mu
};

enum class Action {
    ExecuteDriving,
    ExecuteStoredEmergency,
    FullBrakeFault,
};

inline const char* to_string(Action a) {
    switch (a) {
        case Action::ExecuteDriving: return "execute_driving";
        case Action::ExecuteStoredEmergency: return "execute_stored_emergency";
        case Action::FullBrakeFault: return "full_brake_fault";
    }
    return "?";
}

/// All check results for one trajectory candidate. When input validation
/// fails the checks are skipped and a single unsafe `valid_input` result is
/// reported instead (margin = -violation count).
struct TrajectoryAssessment {
    std::vector<CheckResult> checks;
    std::vector<Violation> violations;
    bool safe{false};

    const CheckResult* find(const std::string& name) const {
        for (const CheckResult& c : checks) {
            if (c.name == name) {
                return &c;
            }
        }
        return nullptr;
    }
};

struct Verdict {
    double t_abs{0.0};
    TrajectoryAssessment driving;
    TrajectoryAssessment emergency;
    bool s_tot{false};  ///< overall rating: both candidates safe
    Action action{Action::FullBrakeFault};
};

/// Carry-over between steps: the last emergency trajectory that was rated
/// safe, available as fallback.
struct SupervisorState {
    std::optional<Trajectory> stored_emergency;
    std::optional<double> last_t_abs;
};

inline SupervisorState reset(const SupervisorState& = {}) { return SupervisorState{}; }

struct SupervisorConfig {
    double pose_match_threshold{1.0};       ///< [m]
    int pose_match_window{3};               ///< trajectory points eligible for pose matching
    double corridor{TrackMap::kDefaultCorridor};
    FootprintReference footprint_reference{FootprintReference::Center};
    bool reverify_stored_emergency{false};  ///< re-check the stored fallback every step
    bool multi_lap_gaps{false};  ///< circuits: min directed gap instead of forward gap
};

/// Runs all seven checks on one candidate. Invalid trajectories and
/// out-of-corridor geometry classify as unsafe instead of raising; the
/// engine must always deliver a rating.
inline TrajectoryAssessment assess_trajectory(const Trajectory& traj, const PerceptionSnapshot& snap,
                                              const TrackMap& map, const VehicleParameters& vehicle,
                                              const RssParameters& rss, const RuleSet& rules,
                                              const SupervisorConfig& config = {}) {
    TrajectoryAssessment out;
    out.violations = validate_trajectory(traj);
    if (!out.violations.empty()) {
        out.checks.push_back(
            {kCheckValidInput, -static_cast<double>(out.violations.size()), false, out.violations.front().index});
        out.safe = false;
        return out;
    }

    const auto guarded = [&](const char* name, auto&& fn) {
        try {
            fn();
        } catch (const OutOfCorridorError&) {
            out.checks.push_back({name, -std::numeric_limits<double>::infinity(), false, -1});
        }
    };

    guarded(kCheckStatic, [&] {
        out.checks.push_back(
            check_static_collision(traj, map, vehicle, config.footprint_reference, config.corridor));
    });
    guarded(kCheckRssLon, [&] {
        const DynamicObjectsResult pair =
            check_dynamic_objects(traj, snap.objects, map, rss, rules, vehicle,
                                  config.footprint_reference, config.corridor, config.multi_lap_gaps);
        out.checks.push_back(pair.lon);
        out.checks.push_back(pair.lat);
    });
    out.checks.push_back(check_pose_match(traj, {snap.ego_pose.x, snap.ego_pose.y},
                                          config.pose_match_threshold, config.pose_match_window));
    if (snap.mu_profile.empty()) {
        out.checks.push_back(check_friction(traj, snap.mu, vehicle));
    } else {
        out.checks.push_back(check_friction(traj, snap.mu_profile, snap.mu, vehicle));
    }
    out.checks.push_back(check_dynamic_limits(traj, vehicle));
    out.checks.push_back(check_rules(traj, rules));

    out.safe = true;
    for (const CheckResult& c : out.checks) {
        out.safe = out.safe && c.safe;
    }
    return out;
}

struct StepResult {
    Verdict verdict;
    SupervisorState state;
};

/// Rates both candidates against the snapshot and selects the action:
/// execute the driving trajectory when everything is safe (storing the fresh
/// emergency as fallback), otherwise fall back to the stored emergency, or
/// to a full-brake fault when no safe fallback was ever stored.
///
/// Classification is stateless: s_tot depends only on the snapshot and the
/// candidates. Only the action depends on the stored fallback. Feeding a
/// non-increasing timestamp is a caller contract violation and throws.
inline StepResult evaluate_step(const SupervisorState& state, const PerceptionSnapshot& snap,
                                const Trajectory& driving, const Trajectory& emergency,
                                const TrackMap& map, const VehicleParameters& vehicle,
                                const RssParameters& rss, const RuleSet& rules,
                                const SupervisorConfig& config = {}) {
    if (state.last_t_abs && !(snap.t_abs > *state.last_t_abs)) {
        throw std::invalid_argument("snapshot timestamps must be strictly increasing");
    }

    StepResult out;
    out.verdict.t_abs = snap.t_abs;
    out.verdict.driving = assess_trajectory(driving, snap, map, vehicle, rss, rules, config);
    out.verdict.emergency = assess_trajectory(emergency, snap, map, vehicle, rss, rules, config);
    out.verdict.s_tot = out.verdict.driving.safe && out.verdict.emergency.safe;

    out.state = state;
    out.state.last_t_abs = snap.t_abs;
    if (out.verdict.s_tot) {
        out.verdict.action = Action::ExecuteDriving;
        out.state.stored_emergency = emergency;
    } else if (out.state.stored_emergency) {
        bool fallback_ok = true;
        if (config.reverify_stored_emergency) {
            fallback_ok =
                assess_trajectory(*out.state.stored_emergency, snap, map, vehicle, rss, rules, config).safe;
        }
        if (fallback_ok) {
            out.verdict.action = Action::ExecuteStoredEmergency;
        } else {
            out.verdict.action = Action::FullBrakeFault;
            out.state.stored_emergency.reset();
        }
    } else {
        out.verdict.action = Action::FullBrakeFault;
    }
    return out;
}

}  // namespace supervisor
