#include "irsv/geometry.hpp"

#include <cmath>

#include "irsv/error.hpp"

namespace irsv {

namespace {

constexpr double kDegenerateSin = 1e-9;

double ray_angle(Point2 from, Point2 to) { return wrap_angle(std::atan2(to.y - from.y, to.x - from.x)); }

bool coincident(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y) == 0.0; }

}  // namespace

double wrap_angle(double rad) {
    double w = std::fmod(rad, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    // fmod of a tiny negative value can round up to exactly 2*pi
    if (w >= kTwoPi) w = 0.0;
    return w;
}

VelocityVector::VelocityVector(double speed, double heading) {
    if (speed < 0.0) {
        speed = -speed;
        heading += kPi;
    }
    speed_ = speed;
    heading_ = wrap_angle(heading);
}

VelocityVector VelocityVector::from_cartesian(double vx, double vy) {
    const double s = std::hypot(vx, vy);
    if (s == 0.0) return {};
    return {s, std::atan2(vy, vx)};
}

std::array<double, 2> VelocityVector::cartesian() const {
    return {speed_ * std::cos(heading_), speed_ * std::sin(heading_)};
}

SceneGeometry angles_from_positions(Point2 bs, Point2 irs, Point2 target) {
    if (coincident(bs, irs) || coincident(bs, target) || coincident(irs, target)) {
        throw GeometryError("BS, IRS and target positions must be pairwise distinct");
    }
    SceneGeometry g;
    g.bs_position = bs;
    g.irs_position = irs;
    g.target_position = target;
    g.theta_tb = ray_angle(bs, target);
    g.theta_it = ray_angle(irs, target);
    g.theta_bi = ray_angle(bs, irs);
    g.theta_ib = ray_angle(irs, bs);
    if (std::abs(std::sin(0.5 * (g.theta_it - g.theta_tb))) < kDegenerateSin) {
        throw GeometryError("target lies on the BS-IRS line; bistatic angle is zero");
    }
    return g;
}

SceneGeometry scene_from_angles(Point2 bs, Point2 irs, double theta_tb, double theta_it) {
    // bs + s*u = irs + t*w  ->  [u, -w] [s, t]^T = irs - bs
    const double ux = std::cos(theta_tb), uy = std::sin(theta_tb);
    const double wx = std::cos(theta_it), wy = std::sin(theta_it);
    const double det = -ux * wy + uy * wx;
    if (std::abs(det) < kDegenerateSin) {
        throw GeometryError("BS and IRS rays toward the target are parallel");
    }
    const double dx = irs.x - bs.x, dy = irs.y - bs.y;
    const double s = (-dx * wy + dy * wx) / det;
    const double t = (ux * dy - uy * dx) / det;
    if (s <= 0.0 || t <= 0.0) {
        throw GeometryError("BS and IRS rays do not intersect in front of both nodes");
    }
    return angles_from_positions(bs, irs, {bs.x + s * ux, bs.y + s * uy});
}

double doppler_direct(const VelocityVector& v, double theta_tb, double wavelength) {
    return 2.0 * v.speed() * std::cos(v.heading() - theta_tb) / wavelength;
}

IrsDoppler doppler_irs_terms(const VelocityVector& v, double theta_tb, double theta_it,
                             double wavelength) {
    IrsDoppler out;
    out.theta_1 = 0.5 * (theta_tb + theta_it) - v.heading();
    out.theta_2 = 0.5 * (theta_it - theta_tb);
    out.mu_r = 2.0 * v.speed() / wavelength * std::cos(out.theta_1) * std::cos(out.theta_2);
    out.f_tb = v.speed() * std::cos(v.heading() - theta_tb) / wavelength;
    out.f_it = v.speed() * std::cos(theta_it - v.heading()) / wavelength;
    return out;
}

double doppler_irs(const VelocityVector& v, double theta_tb, double theta_it, double wavelength) {
    return doppler_irs_terms(v, theta_tb, theta_it, wavelength).mu_r;
}

DopplerPair doppler_pair(const VelocityVector& v, double theta_tb, double theta_it,
                         double wavelength) {
    return {doppler_direct(v, theta_tb, wavelength), doppler_irs(v, theta_tb, theta_it, wavelength)};
}

VelocityVector recover_velocity(const DopplerPair& mu, double theta_tb, double theta_it,
                                double wavelength) {
    const double theta_2 = 0.5 * (theta_it - theta_tb);
    const double sin2 = std::sin(theta_2);
    if (std::abs(sin2) < kDegenerateSin) {
        throw GeometryError("degenerate bistatic angle: cot(theta_2) undefined");
    }
    if (mu.mu_r == 0.0) {
        if (mu.mu_d == 0.0) return {};
        throw EstimationError("IRS-link Doppler is zero; heading is unrecoverable");
    }
    const double bisector = 0.5 * (theta_tb + theta_it);
    const double heading =
        std::atan((1.0 - mu.mu_d / mu.mu_r) * std::cos(theta_2) / sin2) + bisector;

    double speed = 0.0;
    const double radial = std::cos(heading - theta_tb);
    if (std::abs(radial) >= kPerpendicularThreshold) {
        speed = 0.5 * wavelength * mu.mu_d / radial;
    } else {
        const double theta_1 = bisector - heading;
        speed = 0.5 * wavelength * mu.mu_r / (std::cos(theta_1) * std::cos(theta_2));
    }
    return {speed, heading};
}

VelocityVector radial_velocity_no_irs(double mu_d, double theta_tb, double wavelength) {
    return {0.5 * wavelength * mu_d, theta_tb};
}

}  // namespace irsv
