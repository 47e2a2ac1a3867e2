#pragma once

#include <functional>

#include "flowctl/manifold.hpp"
#include "flowctl/vector_field.hpp"

namespace flowctl::tg {

// Heteroclinic y-profile on the x = L line: y(a) = (2L/pi) atan(exp(-pi^2 U a / L)),
// evaluated via the reflection identity for negative arguments so the
// exponential never overflows.
double y_het(const TaylorGreenParams& prm, double a);

// inverse of y_het; y is clamped into (0, L) by a 1e-9 L margin
double a_of_y(const TaylorGreenParams& prm, double y);

// parameter of the slice point at height y and time t: a_of_y - (t - T)
double p_of_y(const TaylorGreenParams& prm, double y, double t, double T);

// target curve: heteroclinic point plus an eps-scaled horizontal ripple that
// decays toward the controlled saddle
Vec2 desired(const TaylorGreenParams& prm, ManifoldKind kind, double eps, double T, double p,
             double t);
Vec2 desired_dp(const TaylorGreenParams& prm, ManifoldKind kind, double eps, double T, double p,
                double t);

// x-coordinate of the time-t slice of the target curve at height y
double slice_x(const TaylorGreenParams& prm, ManifoldKind kind, double eps, double T, double y,
               double t);

// closed-form control velocity (independent of eps); the y-component vanishes
// on x = L and keeps the field divergence-free off it
Vec2 control(const TaylorGreenParams& prm, ManifoldKind kind, double T, Vec2 x, double t);

// top of the guaranteed slice at time t for an endpoint parameter limit
double ymax(const TaylorGreenParams& prm, double T, double p_end, double t);

DesiredManifold make_desired(const TaylorGreenParams& prm, ManifoldKind kind, double eps,
                             double T);
std::function<Vec2(Vec2, double)> make_control(const TaylorGreenParams& prm, ManifoldKind kind,
                                               double T);

} // namespace flowctl::tg
