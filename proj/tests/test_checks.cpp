#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "supervisor/checks.hpp"

#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace supervisor;
using test_support::straight_track;
using test_support::straight_trajectory;
using test_support::test_vehicle;

namespace {

RssParameters test_rss() {
    RssParameters rss;
    rss.rho = 0.5;
    rss.a_r_acc = 5.0;
    rss.a_r_br = 10.0;
    rss.a_f_br = 10.0;
    rss.lat_rho = 0.2;
    rss.a_lat_acc = 2.0;
    rss.a_lat_br = 4.0;
    rss.mu_lat_margin = 0.1;
    return rss;
}

}  // namespace

TEST(RssLonMinGap, ZeroReactionStoppedRearIsZero) {
    RssParameters rss = test_rss();
    rss.rho = 0.0;
    EXPECT_DOUBLE_EQ(rss_lon_min_gap(15.0, 0.0, rss), 0.0);  // clamped at zero
}

TEST(RssLonMinGap, SymmetricBrakingCancels) {
    RssParameters rss = test_rss();
    rss.rho = 0.0;
    for (double v : {0.0, 10.0, 25.0}) {
        EXPECT_DOUBLE_EQ(rss_lon_min_gap(v, v, rss), 0.0);
    }
}

TEST(RssLonMinGap, WorkedExample) {
    RssParameters rss = test_rss();
    const double d_min = rss_lon_min_gap(10.0, 20.0, rss);
    EXPECT_NEAR(d_min, 30.9375, 1e-12);
    EXPECT_GT(31.0, d_min);  // 31 m gap safe
    EXPECT_LT(30.0, d_min);  // 30 m gap unsafe
}

TEST(RssLonMinGap, MatchesWorstCaseSimulation) {
    const RssParameters rss = test_rss();
    const double sim =
        test_oracles::lon_boundary_gap_sim(10.0, 20.0, rss.rho, rss.a_r_acc, rss.a_r_br, rss.a_f_br);
    EXPECT_NEAR(rss_lon_min_gap(10.0, 20.0, rss), sim, 0.1);
}

TEST(RssLatMinGap, MarginOnlyCases) {
    RssParameters rss = test_rss();
    rss.lat_rho = 0.0;
    EXPECT_DOUBLE_EQ(rss_lat_min_gap(0.0, 0.0, rss), 0.1);
    EXPECT_DOUBLE_EQ(rss_lat_min_gap(-8.0, -12.0, rss), 0.1);  // both diverging, clamped
}

TEST(RssLatMinGap, WorkedExampleAgainstSimulation) {
    const RssParameters rss = test_rss();  // lat_rho 0.2, acc 2, br 4, margin 0.1
    const double side1 = test_oracles::lat_intrusion_sim(1.0, rss.lat_rho, rss.a_lat_acc, rss.a_lat_br);
    const double side2 = test_oracles::lat_intrusion_sim(0.0, rss.lat_rho, rss.a_lat_acc, rss.a_lat_br);
    EXPECT_NEAR(side1, 0.485, 1e-6);
    EXPECT_NEAR(side2, 0.06, 1e-6);
    EXPECT_NEAR(rss_lat_min_gap(1.0, 0.0, rss), 0.1 + side1 + side2, 1e-6);
    EXPECT_NEAR(rss_lat_min_gap(1.0, 0.0, rss), 0.645, 1e-9);
}

TEST(CheckStaticCollision, CenteredTrajectoryClearance) {
    const TrackMap map = straight_track(600.0, 5.0);
    VehicleParameters params = test_vehicle();
    params.width = 2.0;
    const CheckResult res = check_static_collision(straight_trajectory(50.0, 0.0, 20.0), map, params);
    EXPECT_TRUE(res.safe);
    EXPECT_NEAR(res.margin, 4.0, 1e-9);
    EXPECT_EQ(res.name, std::string(kCheckStatic));
}

TEST(CheckStaticCollision, ShiftedTrajectoryPenetrates) {
    const TrackMap map = straight_track(600.0, 5.0);
    VehicleParameters params = test_vehicle();
    params.width = 2.0;
    const CheckResult res = check_static_collision(straight_trajectory(50.0, 5.0, 20.0), map, params);
    EXPECT_FALSE(res.safe);
    EXPECT_NEAR(res.margin, -1.0, 1e-9);
}

TEST(CheckStaticCollision, ShortInteriorTrajectorySafe) {
    const TrackMap map = straight_track(600.0, 5.0);
    const CheckResult res =
        check_static_collision(straight_trajectory(50.0, 0.0, 0.0, 2), map, test_vehicle());
    EXPECT_TRUE(res.safe);
    EXPECT_GT(res.margin, 0.0);
}

TEST(CheckPoseMatch, ExactMatchYieldsFullThreshold) {
    const Trajectory traj = straight_trajectory(0.0, 0.0, 10.0);
    const CheckResult res = check_pose_match(traj, {0.0, 0.0}, 1.0, 3);
    EXPECT_TRUE(res.safe);
    EXPECT_DOUBLE_EQ(res.margin, 1.0);
}

TEST(CheckPoseMatch, NearestWindowPointCounts) {
    Trajectory traj = straight_trajectory(0.0, 0.0, 10.0);
    traj.points[0].x = 5.0;
    traj.points[0].y = 5.0;
    traj.points[1].x = 0.2;
    traj.points[1].y = 0.1;
    traj.points[2].x = 5.0;
    const CheckResult res = check_pose_match(traj, {0.0, 0.0}, 1.0, 3);
    EXPECT_TRUE(res.safe);
    EXPECT_NEAR(res.margin, 1.0 - std::sqrt(0.05), 1e-12);
    EXPECT_EQ(res.worst_index, 1);
}

TEST(CheckPoseMatch, GrossMismatchUnsafe) {
    const Trajectory traj = straight_trajectory(100.0, 7.0, 10.0);
    const CheckResult res = check_pose_match(traj, {0.0, 0.0}, 1.0, 3);
    EXPECT_FALSE(res.safe);
    EXPECT_LT(res.margin, 0.0);
}

TEST(CombinedAccelForce, WorkedExamples) {
    TrajectoryPoint p;
    EXPECT_DOUBLE_EQ(combined_accel_force(p, 1000.0), 0.0);

    p.v = 20.0;
    p.kappa = 0.025;
    p.ax = 0.0;
    EXPECT_NEAR(combined_accel_force(p, 1000.0), 10000.0, 1e-9);

    p.v = 10.0;
    p.kappa = 0.04;
    p.ax = 3.0;  // 3-4-5 triple
    EXPECT_NEAR(combined_accel_force(p, 1000.0), 5000.0, 1e-9);
}

TEST(CheckFriction, StationaryTrajectoryMarginIsMu) {
    const Trajectory traj = straight_trajectory(0.0, 0.0, 0.0);
    const CheckResult res = check_friction(traj, 0.8, test_vehicle());
    EXPECT_TRUE(res.safe);
    EXPECT_DOUBLE_EQ(res.margin, 0.8);
}

TEST(CheckFriction, WorkedUnsafeExample) {
    VehicleParameters params = test_vehicle();
    params.mass = 1000.0;
    Trajectory traj = straight_trajectory(0.0, 0.0, 20.0, 2);
    for (auto& p : traj.points) {
        p.kappa = 0.025;  // lateral demand 10 m/s^2 > 9.81
    }
    const CheckResult res = check_friction(traj, 1.0, params);
    EXPECT_FALSE(res.safe);
    EXPECT_NEAR(res.margin, (9.81 - 10.0) / 9.81, 1e-12);
}

TEST(CheckFriction, WorkedSafeExample) {
    VehicleParameters params = test_vehicle();
    params.mass = 1000.0;
    Trajectory traj = straight_trajectory(0.0, 0.0, 10.0, 2);
    for (auto& p : traj.points) {
        p.kappa = 0.04;
        p.ax = 3.0;  // demand 5 vs limit 0.6 * 9.81 = 5.886
    }
    const CheckResult res = check_friction(traj, 0.6, params);
    EXPECT_TRUE(res.safe);
    EXPECT_NEAR(res.margin, (5.886 - 5.0) / 9.81, 1e-12);
}

TEST(CheckFriction, PerPointProfileFallsBackToScalar) {
    VehicleParameters params = test_vehicle();
    params.mass = 1000.0;
    Trajectory traj = straight_trajectory(0.0, 0.0, 20.0, 4);
    for (auto& p : traj.points) {
        p.kappa = 0.025;
    }
    const std::vector<double> profile = {1.2, 1.2};  // rest of the points at 0.9
    const CheckResult res = check_friction(traj, profile, 0.9, params);
    EXPECT_FALSE(res.safe);
    EXPECT_NEAR(res.margin, (0.9 * 9.81 - 10.0) / 9.81, 1e-12);
    EXPECT_GE(res.worst_index, 2);
}

TEST(CheckFriction, ScalingVelocityNeverIncreasesMargin) {
    const VehicleParameters params = test_vehicle();
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> vu(0.0, 30.0);
    std::uniform_real_distribution<double> ku(-0.1, 0.1);
    std::uniform_real_distribution<double> au(-6.0, 4.0);
    std::uniform_real_distribution<double> scale(1.0, 2.0);
    for (int it = 0; it < 100; ++it) {
        Trajectory traj = straight_trajectory(0.0, 0.0, 10.0, 10);
        for (auto& p : traj.points) {
            p.v = vu(rng);
            p.kappa = ku(rng);
            p.ax = au(rng);
        }
        Trajectory scaled = traj;
        const double k = scale(rng);
        for (auto& p : scaled.points) {
            p.v *= k;
        }
        EXPECT_LE(check_friction(scaled, 1.0, params).margin, check_friction(traj, 1.0, params).margin);
    }
}

TEST(CheckDynamicLimits, CurvatureBeyondTurnRadius) {
    VehicleParameters params = test_vehicle();
    params.turn_radius_min = 5.0;  // kappa_max 0.2
    Trajectory traj = straight_trajectory(0.0, 0.0, 2.0, 5);
    traj.points[2].kappa = 0.25;
    const CheckResult res = check_dynamic_limits(traj, params);
    EXPECT_FALSE(res.safe);
    EXPECT_NEAR(res.margin, -0.25, 1e-12);
    EXPECT_EQ(res.worst_index, 2);
}

TEST(CheckDynamicLimits, StraightCruiseFullySlack) {
    const CheckResult res = check_dynamic_limits(straight_trajectory(0.0, 0.0, 10.0), test_vehicle());
    EXPECT_TRUE(res.safe);
    EXPECT_DOUBLE_EQ(res.margin, 1.0);
}

TEST(CheckDynamicLimits, EngineCurveCapsAcceleration) {
    VehicleParameters params = test_vehicle();
    params.a_accel_engine = AccelCurve{{{0.0, 6.0}, {30.0, 6.0}}};
    Trajectory traj = straight_trajectory(0.0, 0.0, 15.0, 5);
    traj.points[1].ax = 8.0;  // friction alone would allow this
    const CheckResult res = check_dynamic_limits(traj, params);
    EXPECT_FALSE(res.safe);
    EXPECT_NEAR(res.margin, (6.0 - 8.0) / 6.0, 1e-12);
}

TEST(CheckDynamicLimits, SafeTrajectoryRespectsTurnRadiusExactly) {
    const VehicleParameters params = test_vehicle();
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> ku(-0.35, 0.35);
    for (int it = 0; it < 200; ++it) {
        Trajectory traj = straight_trajectory(0.0, 0.0, 5.0, 8);
        for (auto& p : traj.points) {
            p.kappa = ku(rng);
        }
        const CheckResult res = check_dynamic_limits(traj, params);
        if (res.safe) {
            for (const auto& p : traj.points) {
                EXPECT_LE(std::abs(p.kappa) * params.turn_radius_min, 1.0);
            }
        }
    }
}

TEST(CheckRules, SlackAndViolationAndVacuous) {
    RuleSet rules;
    rules.v_max = 80.0;
    Trajectory traj = straight_trajectory(0.0, 0.0, 75.0, 4);
    CheckResult res = check_rules(traj, rules);
    EXPECT_TRUE(res.safe);
    EXPECT_NEAR(res.margin, 5.0 / 80.0, 1e-12);

    traj.points[1].v = 81.0;
    res = check_rules(traj, rules);
    EXPECT_FALSE(res.safe);
    EXPECT_EQ(res.worst_index, 1);

    RuleSet empty;
    empty.v_max.reset();
    res = check_rules(traj, empty);
    EXPECT_TRUE(res.safe);
    EXPECT_TRUE(std::isinf(res.margin));
    EXPECT_GT(res.margin, 0.0);
}

TEST(CheckDynamicObjects, FarAheadObjectIsComfortablySafe) {
    const TrackMap map = straight_track(600.0, 6.0);
    const RssParameters rss = test_rss();
    const RuleSet rules;
    ObjectState obj;
    obj.id = 1;
    obj.x = 150.0;
    obj.v = 5.0;
    const Trajectory traj = straight_trajectory(50.0, 0.0, 5.0);
    const std::vector<ObjectState> objects{obj};
    const DynamicObjectsResult pair =
        check_dynamic_objects(traj, objects, map, rss, rules, test_vehicle());
    EXPECT_TRUE(pair.lon.safe);
    EXPECT_TRUE(pair.lat.safe);
    EXPECT_GT(pair.lon.margin, 50.0);
}

TEST(CheckDynamicObjects, EgoAheadExemptionKeepsNegativeMarginsSafe) {
    const TrackMap map = straight_track(600.0, 6.0);
    const RssParameters rss = test_rss();
    RuleSet rules;
    rules.rear_responsibility_enabled = true;
    // object right behind the ego, same lane, same speed
    ObjectState obj;
    obj.id = 1;
    obj.x = 44.0;
    obj.v = 20.0;
    const Trajectory traj = straight_trajectory(50.0, 0.0, 20.0);
    const std::vector<ObjectState> objects{obj};
    const DynamicObjectsResult pair =
        check_dynamic_objects(traj, objects, map, rss, rules, test_vehicle());
    EXPECT_LT(pair.lon.margin, 0.0);
    EXPECT_LT(pair.lat.margin, 0.0);
    EXPECT_TRUE(pair.lon.safe);
    EXPECT_TRUE(pair.lat.safe);

    RuleSet no_rule = rules;
    no_rule.rear_responsibility_enabled = false;
    const DynamicObjectsResult flipped =
        check_dynamic_objects(traj, objects, map, rss, no_rule, test_vehicle());
    EXPECT_FALSE(flipped.lon.safe);
    EXPECT_FALSE(flipped.lat.safe);
}

TEST(CheckDynamicObjects, SlowObjectAheadFires) {
    const TrackMap map = straight_track(600.0, 6.0);
    const RssParameters rss = test_rss();
    const RuleSet rules;
    ObjectState obj;
    obj.id = 1;
    obj.x = 75.0;
    obj.v = 5.0;
    const Trajectory traj = straight_trajectory(50.0, 0.0, 20.0, 30);
    const std::vector<ObjectState> objects{obj};
    const DynamicObjectsResult pair =
        check_dynamic_objects(traj, objects, map, rss, rules, test_vehicle());
    EXPECT_FALSE(pair.lon.safe);
    EXPECT_FALSE(pair.lat.safe);
    EXPECT_LT(pair.lon.margin, 0.0);
}

TEST(CheckDynamicObjects, LateralSeparationKeepsPairSafe) {
    const TrackMap map = straight_track(600.0, 6.0);
    const RssParameters rss = test_rss();
    const RuleSet rules;
    // object alongside in the adjacent lane, overlapping longitudinally
    ObjectState obj;
    obj.id = 1;
    obj.x = 52.0;
    obj.y = 3.5;
    obj.v = 20.0;
    const Trajectory traj = straight_trajectory(50.0, 0.0, 20.0);
    const std::vector<ObjectState> objects{obj};
    const DynamicObjectsResult pair =
        check_dynamic_objects(traj, objects, map, rss, rules, test_vehicle());
    EXPECT_TRUE(pair.lon.safe);
    EXPECT_TRUE(pair.lat.safe);
    EXPECT_LT(pair.lon.margin, 0.0);  // longitudinal axis alone is violated
    EXPECT_GT(pair.lat.margin, 0.0);
}

TEST(CheckDynamicObjects, MovingCloserNeverFlipsUnsafeToSafe) {
    const TrackMap map = straight_track(600.0, 6.0);
    const RssParameters rss = test_rss();
    const RuleSet rules;
    const Trajectory traj = straight_trajectory(50.0, 0.0, 20.0, 30);
    const VehicleParameters vehicle = test_vehicle();
    std::mt19937 rng(59);
    std::uniform_real_distribution<double> ahead(8.0, 120.0);
    std::uniform_real_distribution<double> lat(0.0, 4.0);
    std::uniform_real_distribution<double> vel(0.0, 25.0);
    std::uniform_real_distribution<double> shrink(0.5, 0.95);
    for (int it = 0; it < 60; ++it) {
        ObjectState obj;
        obj.id = 1;
        obj.x = 50.0 + ahead(rng);
        obj.y = lat(rng);
        obj.v = vel(rng);
        const std::vector<ObjectState> far{obj};
        ObjectState closer = obj;  // pulled toward the ego, ordering preserved
        const double k = shrink(rng);
        closer.x = 50.0 + (closer.x - 50.0) * k;
        closer.y *= k;
        const std::vector<ObjectState> near_objs{closer};
        const bool safe_far = check_dynamic_objects(traj, far, map, rss, rules, vehicle).lon.safe;
        const bool safe_near = check_dynamic_objects(traj, near_objs, map, rss, rules, vehicle).lon.safe;
        if (!safe_far) {
            EXPECT_FALSE(safe_near);
        }
    }
}

TEST(CheckDynamicObjects, ClosedTrackForwardGapDefault) {
    // circuit: ring of radius 80, ego just past the seam, object close behind
    std::vector<TrackStation> stations;
    const double r = 80.0;
    const int n = 240;
    for (int i = 0; i <= n; ++i) {
        const double a = 2.0 * kPi * i / n;
        TrackStation st;
        st.s = r * a;
        st.center = i == n ? Vec2{r, 0.0} : Vec2{r * std::cos(a), r * std::sin(a)};
        st.n_left = 6.0;
        st.n_right = 6.0;
        stations.push_back(st);
    }
    const TrackMap ring = TrackMap::from_stations(std::move(stations));
    ASSERT_TRUE(ring.closed());

    const RssParameters rss = test_rss();
    const RuleSet rules;
    const VehicleParameters vehicle = test_vehicle();
    // ego at s ~ 4 heading tangentially, object at s ~ L - 6 (10 m behind
    // across the seam), same speed
    const double ego_a = 4.0 / r;
    Trajectory traj;
    traj.kind = TrajectoryKind::Driving;
    for (int i = 0; i < 10; ++i) {
        TrajectoryPoint p;
        p.t = i / 10.0;
        const double a = ego_a + 15.0 * p.t / r;
        p.x = r * std::cos(a);
        p.y = r * std::sin(a);
        p.psi = a + kPi / 2.0;
        p.kappa = 1.0 / r;
        p.v = 15.0;
        traj.points.push_back(p);
    }
    ObjectState obj;
    obj.id = 1;
    const double obj_a = -6.0 / r;
    obj.x = r * std::cos(obj_a);
    obj.y = r * std::sin(obj_a);
    obj.psi = obj_a + kPi / 2.0;
    obj.v = 15.0;
    const std::vector<ObjectState> objects{obj};

    // default: forward gap along driving direction, i.e. the trailing object
    // reads as almost a lap ahead and the pair is comfortably safe
    const DynamicObjectsResult fwd =
        check_dynamic_objects(traj, objects, ring, rss, rules, vehicle);
    EXPECT_TRUE(fwd.lon.safe);
    EXPECT_GT(fwd.lon.margin, 100.0);

    // multi-lap mode: minimum directed gap, the object is 10 m behind and the
    // margins go negative while the exemption keeps the rating safe
    const DynamicObjectsResult near_gap = check_dynamic_objects(
        traj, objects, ring, rss, rules, vehicle, FootprintReference::Center,
        TrackMap::kDefaultCorridor, true);
    EXPECT_TRUE(near_gap.lon.safe);
    EXPECT_LT(near_gap.lon.margin, 0.0);
}

TEST(Checks, DeterministicBitIdenticalResults) {
    const TrackMap map = straight_track(600.0, 6.0);
    const RssParameters rss = test_rss();
    RuleSet rules;
    rules.v_max = 40.0;
    ObjectState obj;
    obj.id = 1;
    obj.x = 90.0;
    obj.y = 1.5;
    obj.v = 12.0;
    const std::vector<ObjectState> objects{obj};
    Trajectory traj = straight_trajectory(50.0, 0.3, 17.0, 40);
    for (std::size_t i = 0; i < traj.points.size(); ++i) {
        traj.points[i].kappa = 0.01 * std::sin(0.3 * static_cast<double>(i));
        traj.points[i].ax = 0.5;
    }
    const VehicleParameters vehicle = test_vehicle();
    for (int rep = 0; rep < 3; ++rep) {
        const auto a = check_dynamic_objects(traj, objects, map, rss, rules, vehicle);
        const auto b = check_dynamic_objects(traj, objects, map, rss, rules, vehicle);
        EXPECT_EQ(a.lon.margin, b.lon.margin);
        EXPECT_EQ(a.lat.margin, b.lat.margin);
        EXPECT_EQ(check_friction(traj, 0.9, vehicle).margin, check_friction(traj, 0.9, vehicle).margin);
        EXPECT_EQ(check_static_collision(traj, map, vehicle).margin,
                  check_static_collision(traj, map, vehicle).margin);
    }
}
