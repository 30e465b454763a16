#include <gtest/gtest.h>

#include <cmath>

#include "swarmevo/sensors.hpp"
#include "swarmevo/trial.hpp"

using namespace swarmevo;

namespace {

const SensorConfig kCfg;

Vec2 rotate(Vec2 p, double deg) {
    const double r = deg * M_PI / 180.0;
    // clockwise rotation, matching the compass heading convention
    return {p.x * std::cos(r) + p.y * std::sin(r), -p.x * std::sin(r) + p.y * std::cos(r)};
}

TEST(WaypointSensor, Examples) {
    const Pose p{{0, 0}, 0};
    auto r = waypoint_sensor(p, Vec2{0, 40}, kCfg);
    EXPECT_DOUBLE_EQ(r[0], 0.5);
    EXPECT_DOUBLE_EQ(r[1], 0.4);
    r = waypoint_sensor(p, Vec2{0, 0}, kCfg);
    EXPECT_DOUBLE_EQ(r[0], 0.5);
    EXPECT_DOUBLE_EQ(r[1], 0.0);
    r = waypoint_sensor(p, Vec2{0, 200}, kCfg);
    EXPECT_DOUBLE_EQ(r[0], 0.5);
    EXPECT_DOUBLE_EQ(r[1], 1.0);
    r = waypoint_sensor(p, Vec2{10, 0}, kCfg);
    EXPECT_DOUBLE_EQ(r[0], 0.75);
}

TEST(RobotSensor, Examples) {
    const Pose p{{0, 0}, 0};
    const auto none = robot_sensor(p, {}, kCfg);
    for (double v : none) {
        EXPECT_DOUBLE_EQ(v, 1.0);
    }
    const std::vector<Vec2> one{{0, 10}};
    const auto a = robot_sensor(p, one, kCfg);
    EXPECT_DOUBLE_EQ(a[0], 0.25);
    EXPECT_DOUBLE_EQ(a[1], 1.0);
    EXPECT_DOUBLE_EQ(a[2], 1.0);
    EXPECT_DOUBLE_EQ(a[3], 1.0);
    const std::vector<Vec2> two{{0, 20}, {0, 10}};
    EXPECT_DOUBLE_EQ(robot_sensor(p, two, kCfg)[0], 0.25);
}

TEST(RobotSensor, SliceOrderIsFrontRightBackLeft) {
    const Pose p{{0, 0}, 0};
    const std::vector<Vec2> pts{{10, 0}, {0, -20}, {-30, 0}};
    const auto r = robot_sensor(p, pts, kCfg);
    EXPECT_DOUBLE_EQ(r[0], 1.0);
    EXPECT_DOUBLE_EQ(r[1], 0.25);
    EXPECT_DOUBLE_EQ(r[2], 0.5);
    EXPECT_DOUBLE_EQ(r[3], 0.75);
}

TEST(RobotSensor, OutOfRangeIgnored) {
    const std::vector<Vec2> far{{0, 41}};
    EXPECT_DOUBLE_EQ(robot_sensor({{0, 0}, 0}, far, kCfg)[0], 1.0);
}

TEST(GeofenceSensor, Examples) {
    const GeoFence big = GeoFence::rectangle({0, 0}, 200, 200);
    auto r = geofence_sensor({{0, 0}, 0}, &big, kCfg);
    for (double v : r.slices) {
        EXPECT_DOUBLE_EQ(v, 1.0);
    }
    EXPECT_DOUBLE_EQ(r.inside, 1.0);

    r = geofence_sensor({{90, 0}, 0}, &big, kCfg);
    // the eastern edge also enters the front and back wedges at +-45 deg
    const double diag = std::sqrt(200.0) / 40.0;
    EXPECT_DOUBLE_EQ(r.slices[1], 0.25);
    EXPECT_NEAR(r.slices[0], diag, 1e-12);
    EXPECT_NEAR(r.slices[2], diag, 1e-12);
    EXPECT_DOUBLE_EQ(r.slices[3], 1.0);
    EXPECT_DOUBLE_EQ(r.inside, 1.0);

    r = geofence_sensor({{150, 0}, 0}, &big, kCfg);
    EXPECT_DOUBLE_EQ(r.inside, 0.0);
    EXPECT_DOUBLE_EQ(r.slices[3], 1.0);
}

TEST(GeofenceSensor, NoFenceReadsFree) {
    const auto r = geofence_sensor({{0, 0}, 0}, nullptr, kCfg);
    EXPECT_DOUBLE_EQ(r.inside, 1.0);
    for (double v : r.slices) {
        EXPECT_DOUBLE_EQ(v, 1.0);
    }
}

TEST(GeofenceSensor, NearCorner) {
    const GeoFence f = GeoFence::rectangle({0, 0}, 100, 100);
    const auto r = geofence_sensor({{40, 40}, 0}, &f, kCfg);
    EXPECT_DOUBLE_EQ(r.slices[0], 0.25);
    EXPECT_DOUBLE_EQ(r.slices[1], 0.25);
    EXPECT_NEAR(r.slices[2], std::sqrt(200.0) / 40.0, 1e-12);
    EXPECT_NEAR(r.slices[3], std::sqrt(200.0) / 40.0, 1e-12);
}

TEST(Sensors, FuzzedFramesStayInUnitRange) {
    Rng rng = make_rng(21);
    RandomFenceRule rule;
    for (int k = 0; k < 300; ++k) {
        WorldState w;
        w.fence = random_fence(rule, rng);
        w.waypoints = {{uniform(rng, -300, 300), uniform(rng, -300, 300)}};
        w.active_waypoint = 0;
        const int n = uniform_int(rng, 1, 10);
        for (int i = 0; i < n; ++i) {
            RobotState r;
            r.pose = {{uniform(rng, -120, 120), uniform(rng, -120, 120)}, uniform(rng, 0, 360)};
            r.sensed_pose = r.pose;
            w.robots.push_back(r);
        }
        initialize_world(w);
        for (std::size_t i = 0; i < w.robots.size(); ++i) {
            const SensorFrame f = read_sensors(w, i, kCfg);
            for (double v : f.values) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
        }
    }
}

TEST(Sensors, RotationInvariant) {
    Rng rng = make_rng(31);
    RandomFenceRule rule;
    for (int k = 0; k < 100; ++k) {
        const GeoFence f = random_fence(rule, rng);
        const Pose p{{uniform(rng, -30, 30), uniform(rng, -30, 30)}, uniform(rng, 0, 360)};
        std::vector<Vec2> nb;
        for (int i = 0; i < 5; ++i) {
            nb.push_back(p.position + Vec2{uniform(rng, -45, 45), uniform(rng, -45, 45)});
        }
        const double a = uniform(rng, 0, 360);
        std::vector<Vec2> fv;
        for (Vec2 v : f.vertices()) {
            fv.push_back(rotate(v, a));
        }
        const GeoFence rf(fv);
        std::vector<Vec2> rnb;
        for (Vec2 v : nb) {
            rnb.push_back(rotate(v, a));
        }
        const Pose rp{rotate(p.position, a), normalize_heading(p.heading + a)};
        const auto r1 = robot_sensor(p, nb, kCfg);
        const auto r2 = robot_sensor(rp, rnb, kCfg);
        const auto f1 = geofence_sensor(p, &f, kCfg);
        const auto f2 = geofence_sensor(rp, &rf, kCfg);
        for (std::size_t s = 0; s < kSlices; ++s) {
            if (std::abs(r1[s] - r2[s]) > 1e-9) {
                // a neighbour sitting on a slice border may legitimately flip
                continue;
            }
            EXPECT_NEAR(r1[s], r2[s], 1e-9);
            EXPECT_NEAR(f1.slices[s], f2.slices[s], 1e-7);
        }
        EXPECT_EQ(f1.inside, f2.inside);
        const Vec2 wp{uniform(rng, -80, 80), uniform(rng, -80, 80)};
        const auto w1 = waypoint_sensor(p, wp, kCfg);
        const auto w2 = waypoint_sensor(rp, rotate(wp, a), kCfg);
        EXPECT_NEAR(w1[1], w2[1], 1e-9);
        EXPECT_NEAR(std::remainder(w1[0] - w2[0], 1.0), 0.0, 1e-9);
    }
}

TEST(Sensors, ReadingGrowsWithDistance) {
    const Pose p{{0, 0}, 0};
    double prev = -1.0;
    for (double d = 0.5; d < 50.0; d += 0.5) {
        const std::vector<Vec2> one{{0.3 * d, d}};
        const double v = robot_sensor(p, one, kCfg)[0];
        EXPECT_GE(v, prev);
        prev = v;
    }
    prev = -1.0;
    for (double x = 95.0; x > 0.0; x -= 1.0) {
        const GeoFence f = GeoFence::rectangle({0, 0}, 200, 200);
        const double v = geofence_sensor({{x, 0}, 0}, &f, kCfg).slices[1];
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(Sensors, ExpiredLedgerEntriesIgnored) {
    WorldState w;
    w.noise = NoiseConfig::none();
    for (int i = 0; i < 2; ++i) {
        RobotState r;
        r.pose = {{0, 10.0 * i}, 0};
        r.sensed_pose = r.pose;
        w.robots.push_back(r);
    }
    initialize_world(w);
    EXPECT_DOUBLE_EQ(read_sensors(w, 0, kCfg).values[SensorFrame::robot_slices], 0.25);
    w.step = 31;
    EXPECT_DOUBLE_EQ(read_sensors(w, 0, kCfg).values[SensorFrame::robot_slices], 1.0);
}

}  // namespace
