#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "irsv/error.hpp"
#include "irsv/geometry.hpp"
#include "test_util.hpp"

using namespace irsv;
using irsv::test::angle_diff;

namespace {

constexpr double kLambda = 0.1;

// Independent ray intersection through a generic dense solve.
Point2 intersect_rays(Point2 a, double ta, Point2 b, double tb) {
    Eigen::Matrix2d m;
    m << std::cos(ta), -std::cos(tb), std::sin(ta), -std::sin(tb);
    const Eigen::Vector2d rhs(b.x - a.x, b.y - a.y);
    const Eigen::Vector2d st = m.fullPivLu().solve(rhs);
    return {a.x + st[0] * std::cos(ta), a.y + st[0] * std::sin(ta)};
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("angles from positions on the paper layout") {
    const auto g = angles_from_positions({0, 0}, {20, 0}, {15, 5 * std::sqrt(3.0)});
    CHECK(g.theta_bi == doctest::Approx(0.0));
    CHECK(g.theta_ib == doctest::Approx(kPi));
    CHECK(g.theta_tb == doctest::Approx(deg2rad(30)));
    CHECK(g.theta_it == doctest::Approx(deg2rad(120)));
}

TEST_CASE("target on a 30 degree ray") {
    const auto g = angles_from_positions({0, 0}, {20, 0}, {std::cos(deg2rad(30)) * 7, std::sin(deg2rad(30)) * 7});
    CHECK(g.theta_tb == doctest::Approx(deg2rad(30)).epsilon(1e-14));
}

TEST_CASE("scene from angles matches an independent ray intersection") {
    const auto g = scene_from_angles({0, 0}, {20, 0}, deg2rad(30), deg2rad(120));
    const Point2 oracle = intersect_rays({0, 0}, deg2rad(30), {20, 0}, deg2rad(120));
    CHECK(g.target_position.x == doctest::Approx(oracle.x).epsilon(1e-12));
    CHECK(g.target_position.y == doctest::Approx(oracle.y).epsilon(1e-12));
    CHECK(g.target_position.x == doctest::Approx(15.0));
    CHECK(angle_diff(g.theta_tb, deg2rad(30)) < 1e-12);
    CHECK(angle_diff(g.theta_it, deg2rad(120)) < 1e-12);

    Rng rng(7);
    std::uniform_real_distribution<double> pos(-50, 50);
    for (int i = 0; i < 200; ++i) {
        const Point2 bs{pos(rng), pos(rng)}, irs{pos(rng), pos(rng)}, t{pos(rng), pos(rng)};
        SceneGeometry s;
        try {
            s = angles_from_positions(bs, irs, t);
        } catch (const GeometryError&) {
            continue;
        }
        // recomputed ray directions reproduce the inputs
        CHECK(angle_diff(std::atan2(t.y - bs.y, t.x - bs.x), s.theta_tb) < 1e-12);
        CHECK(angle_diff(std::atan2(t.y - irs.y, t.x - irs.x), s.theta_it) < 1e-12);
        CHECK(angle_diff(std::atan2(irs.y - bs.y, irs.x - bs.x), s.theta_bi) < 1e-12);
        CHECK(angle_diff(s.theta_bi + kPi, s.theta_ib) < 1e-12);
    }
}

TEST_CASE("degenerate geometry is rejected") {
    CHECK_THROWS_AS(angles_from_positions({0, 0}, {0, 0}, {1, 1}), GeometryError);
    CHECK_THROWS_AS(angles_from_positions({0, 0}, {20, 0}, {0, 0}), GeometryError);
    // target beyond the IRS on the BS-IRS line: both see it at angle 0
    CHECK_THROWS_AS(angles_from_positions({0, 0}, {20, 0}, {30, 0}), GeometryError);
    CHECK_THROWS_AS(scene_from_angles({0, 0}, {20, 0}, deg2rad(30), deg2rad(30)), GeometryError);
}

TEST_CASE("velocity vector invariants") {
    const VelocityVector v(-3.0, 0.25);
    CHECK(v.speed() == 3.0);
    CHECK(v.heading() == doctest::Approx(0.25 + kPi));
    const auto c = VelocityVector(40, deg2rad(60)).cartesian();
    CHECK(std::hypot(c[0], c[1]) == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(VelocityVector(1.0, -0.1).heading() == doctest::Approx(kTwoPi - 0.1));
    CHECK(wrap_angle(-1e-300) < kTwoPi);
}

TEST_CASE("direct-link Doppler") {
    CHECK(doppler_direct({40, deg2rad(60)}, deg2rad(30), kLambda) ==
          doctest::Approx(800 * std::cos(deg2rad(30))));
    CHECK(doppler_direct({40, deg2rad(60)}, deg2rad(30), kLambda) == doctest::Approx(692.820).epsilon(1e-6));
    CHECK(std::abs(doppler_direct({40, deg2rad(120)}, deg2rad(30), kLambda)) < 1e-10);
    CHECK(doppler_direct({1, 0.4}, 0.4, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("IRS-link Doppler and its intermediates") {
    const auto t = doppler_irs_terms({40, deg2rad(60)}, deg2rad(30), deg2rad(120), kLambda);
    CHECK(rad2deg(t.theta_1) == doctest::Approx(15.0));
    CHECK(rad2deg(t.theta_2) == doctest::Approx(45.0));
    CHECK(t.mu_r == doctest::Approx(800 * std::cos(deg2rad(15)) * std::cos(deg2rad(45))));
    CHECK(t.mu_r == doctest::Approx(546.410).epsilon(1e-6));
    CHECK(t.mu_r == doctest::Approx(t.f_tb + t.f_it).epsilon(1e-12));

    CHECK(std::abs(doppler_irs({5, deg2rad(75 + 90)}, deg2rad(30), deg2rad(120), kLambda)) < 1e-10);
    CHECK(doppler_irs({5, 1.0}, 0.3, 0.3, kLambda) == doctest::Approx(doppler_direct({5, 1.0}, 0.3, kLambda)));
}

TEST_CASE("sum decomposition mu_r = mu_d/2 + f_it") {
    Rng rng(11);
    std::uniform_real_distribution<double> ang(0, kTwoPi), spd(0, 100);
    for (int i = 0; i < 1000; ++i) {
        const VelocityVector v(spd(rng), ang(rng));
        const double tb = ang(rng), it = ang(rng);
        const auto t = doppler_irs_terms(v, tb, it, kLambda);
        const double lhs = t.mu_r;
        const double rhs = 0.5 * doppler_direct(v, tb, kLambda) + t.f_it;
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, 2 * v.speed() / kLambda));
    }
}

TEST_CASE("recover velocity from the paper Doppler pair") {
    const auto v = recover_velocity({692.8203230275509, 546.4101615137755}, deg2rad(30), deg2rad(120), kLambda);
    CHECK(v.speed() == doctest::Approx(40.0).epsilon(1e-9));
    CHECK(rad2deg(v.heading()) == doctest::Approx(60.0).epsilon(1e-9));

    const auto b = recover_velocity({300, 300}, deg2rad(30), deg2rad(120), kLambda);
    CHECK(angle_diff(b.heading(), deg2rad(75)) < 1e-12);

    CHECK(recover_velocity({0, 0}, 0.1, 1.0, kLambda).speed() == 0.0);
    CHECK_THROWS_AS(recover_velocity({10, 0}, 0.1, 1.0, kLambda), EstimationError);
    CHECK_THROWS_AS(recover_velocity({10, 5}, 0.4, 0.4, kLambda), GeometryError);
}

TEST_CASE("near-tangential motion uses the IRS-link speed form") {
    // heading perpendicular to the BS ray: mu_d ~ 0
    const double tb = deg2rad(30), it = deg2rad(120);
    const VelocityVector truth(25, tb + kPi / 2);
    const auto mu = doppler_pair(truth, tb, it, kLambda);
    const auto v = recover_velocity(mu, tb, it, kLambda);
    CHECK(v.speed() == doctest::Approx(25.0).epsilon(1e-9));
    CHECK(angle_diff(v.heading(), truth.heading()) < 1e-9);
}

TEST_CASE("forward then inverse is the identity (property)") {
    Rng rng(2024);
    std::uniform_real_distribution<double> ang(0, kTwoPi), spd(0.5, 120);
    int checked = 0;
    double worst = 0.0;
    while (checked < 10000) {
        const double tb = ang(rng), it = ang(rng);
        if (std::abs(std::sin(0.5 * (it - tb))) < std::sin(deg2rad(1))) continue;
        const VelocityVector v(spd(rng), ang(rng));
        const auto mu = doppler_pair(v, tb, it, kLambda);
        if (std::abs(mu.mu_r) < 1e-6 * v.speed() / kLambda) continue;
        const auto r = recover_velocity(mu, tb, it, kLambda);
        worst = std::max({worst, std::abs(r.speed() - v.speed()) / v.speed(),
                          angle_diff(r.heading(), v.heading()) / kTwoPi});
        ++checked;
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("ambiguity witness: mirrored velocity keeps mu_d, changes mu_r") {
    Rng rng(5);
    std::uniform_real_distribution<double> ang(0, kTwoPi), spd(1, 60);
    for (int i = 0; i < 500; ++i) {
        const double tb = ang(rng), it = ang(rng);
        if (std::abs(std::sin(0.5 * (it - tb))) < 0.05) continue;
        const VelocityVector v(spd(rng), ang(rng));
        const VelocityVector mirrored(v.speed(), 2 * tb - v.heading());
        CHECK(doppler_direct(mirrored, tb, kLambda) ==
              doctest::Approx(doppler_direct(v, tb, kLambda)).epsilon(1e-10));
        if (std::abs(std::sin(v.heading() - tb)) > 0.05) {
            CHECK(std::abs(doppler_irs(mirrored, tb, it, kLambda) - doppler_irs(v, tb, it, kLambda)) > 1e-3);
        }
    }
}

TEST_CASE("no-IRS radial projection") {
    const auto v = radial_velocity_no_irs(692.8203230275509, deg2rad(30), kLambda);
    CHECK(v.speed() == doctest::Approx(34.641).epsilon(1e-5));
    CHECK(angle_diff(v.heading(), deg2rad(30)) < 1e-12);
    CHECK(radial_velocity_no_irs(0.0, 1.0, kLambda).speed() == 0.0);

    const auto truth = VelocityVector(40, deg2rad(60)).cartesian();
    const auto est = v.cartesian();
    CHECK(std::hypot(truth[0] - est[0], truth[1] - est[1]) == doctest::Approx(20.0).epsilon(1e-9));

    // always parallel to the BS-target direction
    Rng rng(9);
    std::uniform_real_distribution<double> u(-2000, 2000), ang(0, kTwoPi);
    for (int i = 0; i < 100; ++i) {
        const double tb = ang(rng);
        const auto c = radial_velocity_no_irs(u(rng), tb, kLambda).cartesian();
        CHECK(std::abs(c[0] * std::sin(tb) - c[1] * std::cos(tb)) < 1e-9);
    }
}

}  // TEST_SUITE
