#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "supervisor/track.hpp"
#include "supervisor/types.hpp"

#include "support/builders.hpp"

using namespace supervisor;
using test_support::quarter_circle_track;
using test_support::straight_track;

TEST(Project, OnLinePoint) {
    const TrackMap map = straight_track(100.0);
    const FrenetPosition fp = map.project({10.0, 0.0});
    EXPECT_NEAR(fp.s, 10.0, 1e-12);
    EXPECT_NEAR(fp.n, 0.0, 1e-12);
}

TEST(Project, PerpendicularOffsetIsLeftPositive) {
    const TrackMap map = straight_track(100.0);
    const FrenetPosition fp = map.project({10.0, 3.0});
    EXPECT_NEAR(fp.s, 10.0, 1e-12);
    EXPECT_NEAR(fp.n, 3.0, 1e-12);
    EXPECT_NEAR(map.project({10.0, -3.0}).n, -3.0, 1e-12);
}

TEST(Project, QuarterCircleArcLength) {
    const TrackMap map = quarter_circle_track(100.0);
    const double a = kPi / 4.0;
    const FrenetPosition fp = map.project({100.0 * std::cos(a), 100.0 * std::sin(a)});
    EXPECT_NEAR(fp.s, 100.0 * kPi / 4.0, 1e-3);  // tolerance from 1 deg discretization
    EXPECT_NEAR(fp.n, 0.0, 1e-3);
}

TEST(Project, OutOfCorridorThrows) {
    const TrackMap map = straight_track(100.0);
    EXPECT_THROW(map.project({10.0, 80.0}), OutOfCorridorError);
    EXPECT_NO_THROW(map.project({10.0, 80.0}, 100.0));
}

TEST(Project, RoundTripReconstruction) {
    const TrackMap maps[] = {straight_track(200.0), quarter_circle_track(100.0)};
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> su(5.0, 140.0);
    std::uniform_real_distribution<double> nu(-4.0, 4.0);
    for (const TrackMap& map : maps) {
        for (int i = 0; i < 200; ++i) {
            const FrenetPosition fp{su(rng), nu(rng)};
            const Vec2 p = map.reconstruct(fp);
            const FrenetPosition back = map.project(p);
            EXPECT_NEAR(back.s, fp.s, 2.1);  // within one polyline segment
            EXPECT_NEAR(back.n, fp.n, 0.05);
            const Vec2 again = map.reconstruct(back);
            EXPECT_NEAR(distance(p, again), 0.0, 0.05);
        }
    }
}

TEST(TrackCsv, RoundTrip) {
    const TrackMap map = quarter_circle_track(50.0, 4.0, 5.0);
    std::ostringstream out;
    map.write_csv(out);
    std::istringstream in(out.str());
    const TrackMap back = TrackMap::parse_csv(in);
    ASSERT_EQ(back.stations().size(), map.stations().size());
    EXPECT_DOUBLE_EQ(back.total_length(), map.total_length());
    std::ostringstream out2;
    back.write_csv(out2);
    EXPECT_EQ(out.str(), out2.str());
}

TEST(TrackCsv, RejectsMalformedInput) {
    {
        std::istringstream in("x;y\n");
        EXPECT_THROW(TrackMap::parse_csv(in), TrackFormatError);
    }
    {
        std::istringstream in("s;x;y;n_left;n_right\n0;0;0;5;5\n0;1;0;5;5\n");
        EXPECT_THROW(TrackMap::parse_csv(in), TrackFormatError);  // s not increasing
    }
    {
        std::istringstream in("s;x;y;n_left;n_right\n0;0;0;5;5\n1;abc;0;5;5\n");
        EXPECT_THROW(TrackMap::parse_csv(in), ParseError);
    }
}

TEST(ClosedTrack, DetectedByDuplicateEndpointAndWraps) {
    // circle of radius 50, duplicated closing sample
    std::vector<TrackStation> stations;
    const double r = 50.0;
    const int n = 180;
    for (int i = 0; i <= n; ++i) {
        const double a = 2.0 * kPi * i / n;
        TrackStation st;
        st.s = r * a;
        st.center = {r * std::cos(a), r * std::sin(a)};
        if (i == n) {
            st.center = {r, 0.0};  // exact closure
        }
        st.n_left = 4.0;
        st.n_right = 4.0;
        stations.push_back(st);
    }
    const TrackMap map = TrackMap::from_stations(std::move(stations));
    EXPECT_TRUE(map.closed());
    const double L = map.total_length();
    EXPECT_NEAR(map.wrap_s(L + 1.0), 1.0, 1e-9);
    EXPECT_NEAR(map.delta_s(L - 1.0, 1.0), 2.0, 1e-9);
    EXPECT_NEAR(map.delta_s(1.0, L - 1.0), -2.0, 1e-9);
    // projection near the seam lands near s=0 (mod L)
    const FrenetPosition fp = map.project({r, -0.5});
    EXPECT_LT(std::min(fp.s, L - fp.s), 1.0);
}

TEST(SignedDistanceToBounds, CenteredSquare) {
    const TrackMap map = straight_track(100.0, 5.0);  // 10 m wide corridor
    const ConvexPolygon square = oriented_rectangle({50.0, 0.0, 0.0}, 2.0, 2.0);
    EXPECT_NEAR(signed_distance_to_bounds(square, map), 4.0, 1e-9);
}

TEST(SignedDistanceToBounds, SquareOnBoundPenetrates) {
    const TrackMap map = straight_track(100.0, 5.0);
    const ConvexPolygon square = oriented_rectangle({50.0, 5.0, 0.0}, 2.0, 2.0);
    EXPECT_NEAR(signed_distance_to_bounds(square, map), -1.0, 1e-9);
}

TEST(SignedDistanceToBounds, InteriorPolygonMonotoneWithOffset) {
    const TrackMap map = straight_track(100.0, 5.0);
    const double d0 = signed_distance_to_bounds(oriented_rectangle({50.0, 0.0, 0.0}, 2.0, 2.0), map);
    const double d1 = signed_distance_to_bounds(oriented_rectangle({50.0, 1.0, 0.0}, 2.0, 2.0), map);
    const double d2 = signed_distance_to_bounds(oriented_rectangle({50.0, 2.5, 0.0}, 2.0, 2.0), map);
    EXPECT_GT(d0, d1);
    EXPECT_GT(d1, d2);
    EXPECT_NEAR(d1, 3.0, 1e-9);
}

TEST(SignedDistanceToBounds, ContinuousUnderSmallTranslations) {
    const TrackMap map = straight_track(100.0, 5.0);
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> yu(-4.5, 4.5);
    std::uniform_real_distribution<double> du(-0.2, 0.2);
    for (int i = 0; i < 300; ++i) {
        const double y = yu(rng);
        const double dx = du(rng);
        const double dy = du(rng);
        const ConvexPolygon a = oriented_rectangle({50.0, y, 0.3}, 2.0, 1.0);
        const ConvexPolygon b = oriented_rectangle({50.0 + dx, y + dy, 0.3}, 2.0, 1.0);
        const double shift = std::sqrt(dx * dx + dy * dy);
        EXPECT_LE(std::abs(signed_distance_to_bounds(a, map) - signed_distance_to_bounds(b, map)),
                  shift + 1e-9);
    }
}
