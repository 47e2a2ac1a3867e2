#include "flowctl/taylor_green.hpp"

#include <cmath>

#include "flowctl/errors.hpp"

namespace flowctl::tg {

namespace {
const double kPi = 3.14159265358979323846;

double clamp_y(const TaylorGreenParams& prm, double y) {
    const double floor = 1e-9 * prm.L;
    return std::fmin(std::fmax(y, floor), prm.L - floor);
}
} // namespace

double y_het(const TaylorGreenParams& prm, double a) {
    const double z = kPi * kPi * prm.U * a / prm.L;
    // atan(e^-z) = pi/2 - atan(e^z); split on the sign so exp stays bounded
    if (z >= 0.0) return (2.0 * prm.L / kPi) * std::atan(std::exp(-z));
    return prm.L - (2.0 * prm.L / kPi) * std::atan(std::exp(z));
}

double a_of_y(const TaylorGreenParams& prm, double y) {
    // invert through the end nearer to y: tan of a small angle is well
    // conditioned, while tan near pi/2 loses ~half the digits. Clamping the
    // small wall distance (not the reconstructed y) keeps the two ends exact
    // mirrors of each other in floating point.
    const double floor = 1e-9 * prm.L;
    const double scale = prm.L / (kPi * kPi * prm.U);
    if (y <= 0.5 * prm.L) {
        const double d = std::fmax(y, floor);
        return -scale * std::log(std::tan(kPi * d / (2.0 * prm.L)));
    }
    const double d = std::fmax(prm.L - y, floor);
    return scale * std::log(std::tan(kPi * d / (2.0 * prm.L)));
}

double p_of_y(const TaylorGreenParams& prm, double y, double t, double T) {
    return a_of_y(prm, y) - (t - T);
}

Vec2 desired(const TaylorGreenParams& prm, ManifoldKind kind, double eps, double T, double p,
             double t) {
    const double sgn = kind == ManifoldKind::stable ? -1.0 : 1.0;
    const double ripple =
        prm.L * std::exp(sgn * prm.U * p / prm.L) * std::cos(prm.U * (t - p) / prm.L);
    return {prm.L + eps * ripple, y_het(prm, t - T + p)};
}

Vec2 desired_dp(const TaylorGreenParams& prm, ManifoldKind kind, double eps, double T, double p,
                double t) {
    const double sgn = kind == ManifoldKind::stable ? -1.0 : 1.0;
    const double w = prm.U * (t - p) / prm.L;
    const double dx = eps * prm.U * std::exp(sgn * prm.U * p / prm.L) *
                      (sgn * std::cos(w) + std::sin(w));
    const double y = y_het(prm, t - T + p);
    const double dy = -kPi * prm.U * std::sin(kPi * y / prm.L);
    return {dx, dy};
}

double slice_x(const TaylorGreenParams& prm, ManifoldKind kind, double eps, double T, double y,
               double t) {
    const double p = p_of_y(prm, y, t, T);
    const double sgn = kind == ManifoldKind::stable ? -1.0 : 1.0;
    return prm.L * (1.0 + eps * std::exp(sgn * prm.U * p / prm.L) *
                              std::cos(prm.U * (t - p) / prm.L));
}

Vec2 control(const TaylorGreenParams& prm, ManifoldKind kind, double T, Vec2 x, double t) {
    const double sgn = kind == ManifoldKind::stable ? -1.0 : 1.0;
    const double p = p_of_y(prm, x.y, t, T);
    const double w = prm.U * (t - p) / prm.L;
    const double ky = kPi * clamp_y(prm, x.y) / prm.L;
    const double gx = -prm.U * std::exp(sgn * prm.U * p / prm.L) *
                      (std::sin(w) + kPi * kPi * std::cos(ky) * std::cos(w));
    const double gy = prm.U * std::sin(kPi * x.x / prm.L) * std::sin(prm.U * t / prm.L);
    return {gx, gy};
}

double ymax(const TaylorGreenParams& prm, double T, double p_end, double t) {
    return y_het(prm, t - T + p_end);
}

DesiredManifold make_desired(const TaylorGreenParams& prm, ManifoldKind kind, double eps,
                             double T) {
    if (!(eps > 0.0)) throw config_error("taylor-green target needs eps > 0");
    DesiredManifold d;
    d.eps = eps;
    d.target = [prm, kind, eps, T](double p, double t) { return desired(prm, kind, eps, T, p, t); };
    d.target_dp = [prm, kind, eps, T](double p, double t) {
        return desired_dp(prm, kind, eps, T, p, t);
    };
    return d;
}

std::function<Vec2(Vec2, double)> make_control(const TaylorGreenParams& prm, ManifoldKind kind,
                                               double T) {
    return [prm, kind, T](Vec2 x, double t) { return control(prm, kind, T, x, t); };
}

} // namespace flowctl::tg
