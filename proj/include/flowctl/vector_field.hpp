#pragma once

#include <array>
#include <functional>
#include <string>

#include "flowctl/geometry.hpp"

namespace flowctl {

struct TaylorGreenParams {
    double U = 1.0; // velocity amplitude, > 0
    double L = 1.0; // cell size, > 0
};

// Autonomous planar field f : R^2 -> R^2 with first and second derivatives.
// Derivative callbacks are optional; missing ones fall back to central
// finite differences whose step is tied to the domain diagonal.
struct VectorField2D {
    std::function<Vec2(Vec2)> f;
    std::function<Mat2(Vec2)> jac;                 // optional analytic Jacobian
    std::function<std::array<Mat2, 2>(Vec2)> hess; // optional: Hessians of (f1, f2)
    Rect domain;

    Vec2 eval(Vec2 x) const { return f(x); }
    Mat2 jacobian(Vec2 x) const;
    // hessian(x)[c] is the Hessian matrix of component c
    std::array<Mat2, 2> hessian(Vec2 x) const;

    bool has_analytic_jacobian() const { return static_cast<bool>(jac); }

    // steps for the finite-difference fallbacks
    double fd_step_jac() const { return 1e-5 * domain.diagonal(); }
    double fd_step_hess() const { return 1e-4 * domain.diagonal(); }
};

// hyperbolic fixed point with one-dimensional stable / unstable directions
struct SaddleData {
    Vec2 a;                   // fixed point
    double lambda_s = 0.0;    // < 0
    double lambda_u = 0.0;    // > 0
    Vec2 v_s, v_u;            // unit eigenvectors, first nonzero component >= 0
};

struct SaddleSearchOptions {
    int max_iter = 50;
    double tol_fixedpoint = 1e-12; // on |f| relative to velocity scale (abs if scale ~ 0)
    double tol_eig = 1e-8;         // eigenvalue imaginary-part / sign tolerance
};

// Newton search from `guess`; classifies the fixed point and throws
// validation_error("not a saddle: ...") for centers/spirals/nodes,
// numerical_error on non-convergence.
SaddleData find_saddle(const VectorField2D& field, Vec2 guess,
                       const SaddleSearchOptions& opt = {});

// Taylor-Green cellular flow on [0,2L]x[0,L] by default:
//   f = ( -pi U sin(pi x / L) cos(pi y / L),  pi U cos(pi x / L) sin(pi y / L) )
// Analytic Jacobian and Hessians attached.
VectorField2D taylor_green_field(const TaylorGreenParams& prm);
VectorField2D taylor_green_field(const TaylorGreenParams& prm, Rect domain);

// Field from two expression strings in variables x, y (autonomous).
// Derivatives are finite-difference.
VectorField2D expression_field(const std::string& fx, const std::string& fy, Rect domain);

} // namespace flowctl
