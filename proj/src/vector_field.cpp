#include "flowctl/vector_field.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "flowctl/errors.hpp"
#include "flowctl/expression.hpp"

namespace flowctl {

namespace {
const double kPi = 3.14159265358979323846;
}

Mat2 VectorField2D::jacobian(Vec2 x) const {
    if (jac) return jac(x);
    const double h = fd_step_jac();
    const Vec2 fxp = f({x.x + h, x.y});
    const Vec2 fxm = f({x.x - h, x.y});
    const Vec2 fyp = f({x.x, x.y + h});
    const Vec2 fym = f({x.x, x.y - h});
    const double inv2h = 1.0 / (2.0 * h);
    return {(fxp.x - fxm.x) * inv2h, (fyp.x - fym.x) * inv2h,
            (fxp.y - fxm.y) * inv2h, (fyp.y - fym.y) * inv2h};
}

std::array<Mat2, 2> VectorField2D::hessian(Vec2 x) const {
    if (hess) return hess(x);
    // central differences of the (possibly analytic) Jacobian
    const double h = fd_step_hess();
    const Mat2 jxp = jacobian({x.x + h, x.y});
    const Mat2 jxm = jacobian({x.x - h, x.y});
    const Mat2 jyp = jacobian({x.x, x.y + h});
    const Mat2 jym = jacobian({x.x, x.y - h});
    const double inv2h = 1.0 / (2.0 * h);
    // rows of J are gradients of f1, f2; Hessian of f_c stacks d/dx, d/dy of that row
    Mat2 h1{(jxp.a11 - jxm.a11) * inv2h, (jyp.a11 - jym.a11) * inv2h,
            (jxp.a12 - jxm.a12) * inv2h, (jyp.a12 - jym.a12) * inv2h};
    Mat2 h2{(jxp.a21 - jxm.a21) * inv2h, (jyp.a21 - jym.a21) * inv2h,
            (jxp.a22 - jxm.a22) * inv2h, (jyp.a22 - jym.a22) * inv2h};
    return {h1, h2};
}

namespace {

// unit eigenvector of 2x2 A for eigenvalue lam, robust to either zero row
Vec2 eigenvector(const Mat2& A, double lam) {
    // (A - lam I) v = 0; take the better-conditioned of the two row solutions
    const Vec2 c1{A.a12, lam - A.a11};
    const Vec2 c2{lam - A.a22, A.a21};
    Vec2 v = norm(c1) >= norm(c2) ? c1 : c2;
    const double n = norm(v);
    if (n == 0.0) {
        // diagonal matrix: eigenvector is a coordinate axis
        v = std::abs(A.a11 - lam) <= std::abs(A.a22 - lam) ? Vec2{1, 0} : Vec2{0, 1};
        return v;
    }
    v = v / n;
    // sign convention: first nonzero component nonnegative
    if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) v = -v;
    return v;
}

} // namespace

SaddleData find_saddle(const VectorField2D& field, Vec2 guess, const SaddleSearchOptions& opt) {
    // velocity scale for the convergence test: |f| at the initial guess,
    // floored so that a guess already at the fixed point still terminates
    double scale = norm(field.eval(guess));
    if (!(scale > 0.0)) scale = 1.0;

    Vec2 x = guess;
    bool converged = false;
    for (int it = 0; it < opt.max_iter; ++it) {
        const Vec2 fx = field.eval(x);
        if (norm(fx) <= opt.tol_fixedpoint * scale) {
            converged = true;
            break;
        }
        const Mat2 A = field.jacobian(x);
        const double det = A.det();
        if (!(std::abs(det) > 0.0)) {
            throw numerical_error("saddle search: singular Jacobian at (" +
                                  std::to_string(x.x) + ", " + std::to_string(x.y) + ")");
        }
        // Newton step: solve A d = -f
        const Vec2 d{(-fx.x * A.a22 + fx.y * A.a12) / det,
                     (-fx.y * A.a11 + fx.x * A.a21) / det};
        x += d;
        if (!std::isfinite(x.x) || !std::isfinite(x.y)) {
            throw numerical_error("saddle search diverged from guess (" +
                                  std::to_string(guess.x) + ", " + std::to_string(guess.y) + ")");
        }
    }
    if (!converged && !(norm(field.eval(x)) <= opt.tol_fixedpoint * scale)) {
        throw numerical_error("saddle search: no convergence within " +
                              std::to_string(opt.max_iter) + " iterations from (" +
                              std::to_string(guess.x) + ", " + std::to_string(guess.y) + ")");
    }

    const Mat2 A = field.jacobian(x);
    const double tr = A.trace();
    const double det = A.det();
    const double disc = tr * tr - 4.0 * det;
    const double eig_scale = std::max(1.0, frob_norm(A));

    std::ostringstream loc;
    loc << "(" << x.x << ", " << x.y << ")";

    if (disc < -opt.tol_eig * eig_scale * eig_scale) {
        throw validation_error("not a saddle: complex eigenvalue pair at fixed point " + loc.str() +
                               " (center or spiral)");
    }
    const double sq = std::sqrt(std::max(0.0, disc));
    double l1 = 0.5 * (tr + sq);
    double l2 = 0.5 * (tr - sq);
    if (!(l2 < -opt.tol_eig * eig_scale && l1 > opt.tol_eig * eig_scale)) {
        throw validation_error("not a saddle: eigenvalues " + std::to_string(l1) + ", " +
                               std::to_string(l2) + " at fixed point " + loc.str() +
                               " do not straddle zero");
    }

    SaddleData s;
    s.a = x;
    s.lambda_u = l1;
    s.lambda_s = l2;
    s.v_u = eigenvector(A, l1);
    s.v_s = eigenvector(A, l2);
    return s;
}

VectorField2D taylor_green_field(const TaylorGreenParams& prm) {
    return taylor_green_field(prm, Rect{0.0, 2.0 * prm.L, 0.0, prm.L});
}

VectorField2D taylor_green_field(const TaylorGreenParams& prm, Rect domain) {
    if (!(prm.U > 0.0) || !(prm.L > 0.0)) {
        throw config_error("taylor_green_field: U and L must be positive");
    }
    const double U = prm.U, L = prm.L;
    const double k = kPi / L;

    VectorField2D vf;
    vf.domain = domain;
    vf.f = [U, k](Vec2 p) -> Vec2 {
        return {-kPi * U * std::sin(k * p.x) * std::cos(k * p.y),
                kPi * U * std::cos(k * p.x) * std::sin(k * p.y)};
    };
    vf.jac = [U, k](Vec2 p) -> Mat2 {
        const double c = kPi * U * k;
        const double sx = std::sin(k * p.x), cx = std::cos(k * p.x);
        const double sy = std::sin(k * p.y), cy = std::cos(k * p.y);
        return {-c * cx * cy, c * sx * sy,
                -c * sx * sy, c * cx * cy};
    };
    vf.hess = [U, k](Vec2 p) -> std::array<Mat2, 2> {
        const double c = kPi * U * k * k;
        const double sx = std::sin(k * p.x), cx = std::cos(k * p.x);
        const double sy = std::sin(k * p.y), cy = std::cos(k * p.y);
        // f1 = -pi U sin(kx) cos(ky)
        Mat2 h1{c * sx * cy, c * cx * sy,
                c * cx * sy, c * sx * cy};
        // f2 =  pi U cos(kx) sin(ky)
        Mat2 h2{-c * cx * sy, -c * sx * cy,
                -c * sx * cy, -c * cx * sy};
        return {h1, h2};
    };
    return vf;
}

VectorField2D expression_field(const std::string& fx, const std::string& fy, Rect domain) {
    auto ex = std::make_shared<Expression>(Expression::parse(fx, {"x", "y"}));
    auto ey = std::make_shared<Expression>(Expression::parse(fy, {"x", "y"}));
    VectorField2D vf;
    vf.domain = domain;
    vf.f = [ex, ey](Vec2 p) -> Vec2 {
        const double args[2] = {p.x, p.y};
        return {ex->eval(args), ey->eval(args)};
    };
    return vf;
}

} // namespace flowctl
