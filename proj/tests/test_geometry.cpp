#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "swarmevo/geometry.hpp"
#include "swarmevo/trial.hpp"

using namespace swarmevo;

namespace {

GeoFence square100() { return GeoFence::rectangle({0, 0}, 100, 100); }

TEST(PointInPolygon, SquareExamples) {
    const auto f = square100();
    EXPECT_TRUE(point_in_polygon({0, 0}, f));
    EXPECT_FALSE(point_in_polygon({100, 100}, f));
    EXPECT_TRUE(point_in_polygon({50, 0}, f));
    EXPECT_TRUE(point_in_polygon({50, 50}, f));
}

TEST(PointInPolygon, MatchesWindingNumberOnRandomFences) {
    Rng rng = make_rng(7);
    RandomFenceRule rule;
    for (int k = 0; k < 100; ++k) {
        const GeoFence f = random_fence(rule, rng);
        const std::vector<Vec2> verts(f.vertices().begin(), f.vertices().end());
        const auto [lo, hi] = f.bounds();
        for (int i = 0; i < 200; ++i) {
            const Vec2 p{uniform(rng, lo.x - 10, hi.x + 10), uniform(rng, lo.y - 10, hi.y + 10)};
            if (distance_to_fence(p, f) < 1e-9) {
                continue;
            }
            EXPECT_EQ(point_in_polygon(p, f), oracle::winding_number(p, verts) != 0);
        }
    }
}

TEST(PointInPolygon, NonConvexLShape) {
    const GeoFence l({{0, 0}, {100, 0}, {100, 50}, {50, 50}, {50, 100}, {0, 100}});
    EXPECT_TRUE(point_in_polygon({25, 75}, l));
    EXPECT_FALSE(point_in_polygon({75, 75}, l));
    EXPECT_TRUE(point_in_polygon({50, 75}, l));
}

TEST(DistanceToFence, Examples) {
    const auto f = square100();
    EXPECT_DOUBLE_EQ(distance_to_fence({0, 0}, f), 50.0);
    EXPECT_DOUBLE_EQ(distance_to_fence({50, 50}, f), 0.0);
    EXPECT_DOUBLE_EQ(distance_to_fence({60, 0}, f), 10.0);
}

TEST(DistanceToFence, MatchesSegmentOracle) {
    Rng rng = make_rng(3);
    RandomFenceRule rule;
    for (int k = 0; k < 50; ++k) {
        const GeoFence f = random_fence(rule, rng);
        const std::vector<Vec2> v(f.vertices().begin(), f.vertices().end());
        for (int i = 0; i < 50; ++i) {
            const Vec2 p{uniform(rng, -200, 200), uniform(rng, -200, 200)};
            double best = 1e300;
            for (std::size_t e = 0; e < v.size(); ++e) {
                best = std::min(best, oracle::segment_distance(p, v[e], v[(e + 1) % v.size()]));
            }
            EXPECT_NEAR(distance_to_fence(p, f), best, 1e-9);
        }
    }
}

TEST(RelativeBearing, Examples) {
    EXPECT_DOUBLE_EQ(relative_bearing(Pose{{0, 0}, 0}, {0, 10}), 0.0);
    EXPECT_DOUBLE_EQ(relative_bearing(Pose{{0, 0}, 0}, {10, 0}), 90.0);
    EXPECT_DOUBLE_EQ(relative_bearing(Pose{{0, 0}, 90}, {0, 10}), -90.0);
}

TEST(RelativeBearing, AlwaysInHalfOpenRange) {
    Rng rng = make_rng(11);
    for (int i = 0; i < 10000; ++i) {
        const Pose p{{uniform(rng, -50, 50), uniform(rng, -50, 50)}, uniform(rng, 0, 360)};
        const Vec2 t{uniform(rng, -50, 50), uniform(rng, -50, 50)};
        const double b = relative_bearing(p, t);
        EXPECT_GT(b, -180.0);
        EXPECT_LE(b, 180.0);
        const double rad = (p.heading + b) * M_PI / 180.0;
        const Vec2 d = t - p.position;
        EXPECT_NEAR(std::sin(rad) * norm(d), d.x, 1e-7);
        EXPECT_NEAR(std::cos(rad) * norm(d), d.y, 1e-7);
    }
}

TEST(Headings, Normalization) {
    EXPECT_DOUBLE_EQ(normalize_heading(-90), 270.0);
    EXPECT_DOUBLE_EQ(normalize_heading(720), 0.0);
    EXPECT_DOUBLE_EQ(normalize_bearing(270), -90.0);
    EXPECT_DOUBLE_EQ(normalize_bearing(-180), -180.0);
    EXPECT_DOUBLE_EQ(normalize_bearing(180), -180.0);
}

TEST(GeoFence, RejectsDegeneratePolygons) {
    EXPECT_THROW(GeoFence({{0, 0}, {1, 0}}), ConfigError);
    EXPECT_THROW(GeoFence({{0, 0}, {1, 0}, {2, 0}}), ConfigError);
    EXPECT_THROW(GeoFence({{0, 0}, {10, 10}, {10, 0}, {0, 10}}), ConfigError);
}

TEST(GeoFence, AreaAndCentroid) {
    const GeoFence f = GeoFence::rectangle({3, -2}, 20, 10);
    EXPECT_DOUBLE_EQ(f.area(), 200.0);
    EXPECT_NEAR(f.centroid().x, 3.0, 1e-12);
    EXPECT_NEAR(f.centroid().y, -2.0, 1e-12);
}

}  // namespace
