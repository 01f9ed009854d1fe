#pragma once

#include <array>
#include <numbers>

namespace irsv {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle to [0, 2*pi).
double wrap_angle(double rad);

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Positions of the base station, the reflecting surface and the target, plus the
/// four ray directions between them (radians, measured from the x-axis).
struct SceneGeometry {
    Point2 bs_position;
    Point2 irs_position;
    Point2 target_position;
    double theta_tb = 0.0;  // target seen from BS
    double theta_it = 0.0;  // target seen from IRS
    double theta_bi = 0.0;  // IRS seen from BS
    double theta_ib = 0.0;  // BS seen from IRS
};

class VelocityVector {
public:
    VelocityVector() = default;
    /// A negative speed is folded into the heading (rotated by pi).
    VelocityVector(double speed, double heading);

    static VelocityVector from_cartesian(double vx, double vy);

    double speed() const { return speed_; }
    double heading() const { return heading_; }
    std::array<double, 2> cartesian() const;

private:
    double speed_ = 0.0;
    double heading_ = 0.0;
};

struct DopplerPair {
    double mu_d = 0.0;  // direct link, Hz
    double mu_r = 0.0;  // IRS link, Hz
};

/// Throws GeometryError when any two positions coincide or the three points are
/// collinear with the target between/along the BS-IRS line (sin(theta_2) = 0).
SceneGeometry angles_from_positions(Point2 bs, Point2 irs, Point2 target);

/// Places the target at the intersection of the BS ray at theta_tb and the IRS ray
/// at theta_it. Throws GeometryError if the rays are parallel or meet behind either node.
SceneGeometry scene_from_angles(Point2 bs, Point2 irs, double theta_tb, double theta_it);

double doppler_direct(const VelocityVector& v, double theta_tb, double wavelength);

struct IrsDoppler {
    double mu_r = 0.0;
    double theta_1 = 0.0;  // bisector offset, (theta_tb + theta_it)/2 - heading
    double theta_2 = 0.0;  // half bistatic angle, (theta_it - theta_tb)/2
    double f_tb = 0.0;
    double f_it = 0.0;
};

IrsDoppler doppler_irs_terms(const VelocityVector& v, double theta_tb, double theta_it,
                             double wavelength);

double doppler_irs(const VelocityVector& v, double theta_tb, double theta_it, double wavelength);

DopplerPair doppler_pair(const VelocityVector& v, double theta_tb, double theta_it,
                         double wavelength);

/// Below this |cos(heading - theta_tb)| the speed is taken from the IRS-link Doppler.
inline constexpr double kPerpendicularThreshold = 1e-6;

/// Closed-form inverse of the two Doppler maps. Throws GeometryError for a
/// degenerate bistatic angle and EstimationError when mu_r = 0 with mu_d != 0.
VelocityVector recover_velocity(const DopplerPair& mu, double theta_tb, double theta_it,
                                double wavelength);

/// Mono-static estimate: the radial projection along the BS-target line.
VelocityVector radial_velocity_no_irs(double mu_d, double theta_tb, double wavelength);

}  // namespace irsv
