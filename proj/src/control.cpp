#include "flowctl/control.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "flowctl/errors.hpp"

namespace flowctl {

namespace {

// manifold point at an argument, linearized continuation past the cap
Vec2 point_at(const UnperturbedManifold& man, double a) {
    return man.covers(a) ? man.pos(a) : man.pos_ext(a);
}

void project_at(const UnperturbedManifold& man, const DesiredManifold& des, double p, double t,
                double& M, double& B) {
    const double a = man.arg(p, t);
    const Vec2 y = point_at(man, a);
    const Vec2 f = man.field->eval(y);
    const Vec2 d = des.value(p, t) - y;
    M = dot(rotate90(f), d) / des.eps;
    B = dot(f, d) / des.eps;
}

} // namespace

ProjectionSample project_MB(const UnperturbedManifold& man, const DesiredManifold& des, double p,
                            double t) {
    ProjectionSample s;
    s.p = p;
    s.t = t;
    project_at(man, des, p, t, s.M, s.B);
    return s;
}

ProjectionSample differentiate_MB(const UnperturbedManifold& man, const DesiredManifold& des,
                                  double p, double t, double h_t) {
    if (!(h_t > 0.0)) throw config_error("differentiate_MB needs h_t > 0");
    ProjectionSample s = project_MB(man, des, p, t);
    double M1, B1, M2, B2, Mm1, Bm1, Mm2, Bm2;
    project_at(man, des, p, t + h_t, M1, B1);
    project_at(man, des, p, t + 2.0 * h_t, M2, B2);
    project_at(man, des, p, t - h_t, Mm1, Bm1);
    project_at(man, des, p, t - 2.0 * h_t, Mm2, Bm2);
    const double inv = 1.0 / (12.0 * h_t);
    s.dM_dt = (-M2 + 8.0 * M1 - 8.0 * Mm1 + Mm2) * inv;
    s.dB_dt = (-B2 + 8.0 * B1 - 8.0 * Bm1 + Bm2) * inv;
    return s;
}

OnManifoldControl control_components(const UnperturbedManifold& man, const DesiredManifold& des,
                                     double p, double t, double h_t) {
    const double a = man.arg(p, t);
    const Vec2 y = point_at(man, a);
    const Vec2 f = man.field->eval(y);
    const double fn = norm(f);
    if (fn <= man.eta) {
        throw numerical_error("control components too close to the saddle: |f| = " +
                              std::to_string(fn) + " at arg = " + std::to_string(a));
    }
    const ProjectionSample s = differentiate_MB(man, des, p, t, h_t);
    const Mat2 Df = man.field->jacobian(y);
    const double tr = Df.trace();

    OnManifoldControl out;
    out.g_perp = (s.dM_dt - tr * s.M) / fn;
    const Mat2 S = Df + Df.transposed();
    const Vec2 w = rotate90(f) * s.M + f * s.B;
    out.g_par = (fn * fn * s.dB_dt - dot(f, S * w)) / (fn * fn * fn);
    out.g = rotate90(f) * (out.g_perp / fn) + f * (out.g_par / fn);
    return out;
}

OnManifoldControl ControlField::on_manifold(double p, double t) const {
    const double a = man->arg(p, t);
    const bool past_cap = man->kind == ManifoldKind::stable ? a > man->p_cap : a < man->p_cap;
    if (!past_cap) {
        return control_components(*man, des, p, t, h_t);
    }
    // evaluate at the capped argument (same t) and scale by the speed decay
    const double p_c = p - (a - man->p_cap);
    OnManifoldControl out = control_components(*man, des, p_c, t, h_t);
    const double lam = man->kind == ManifoldKind::stable ? man->saddle.lambda_s
                                                         : man->saddle.lambda_u;
    const double rho = std::exp(lam * (a - man->p_cap));
    out.g_perp *= rho;
    out.g_par *= rho;
    out.g *= rho;
    return out;
}

double ControlField::nearest_parameter(Vec2 x, double t) const {
    const double shift = t - man->time_anchor;
    const double lo = man->p_min - shift;
    const double hi = man->p_max - shift;
    const int n = search_samples;

    double best_p = lo, best_d = norm_sq(des.value(lo, t) - x);
    for (int i = 1; i <= n; ++i) {
        const double p = lo + (hi - lo) * i / n;
        const double d = norm_sq(des.value(p, t) - x);
        if (d < best_d) { // strict: ties keep the smaller parameter
            best_d = d;
            best_p = p;
        }
    }
    // golden-section refinement on the bracketing interval
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::max(lo, best_p - (hi - lo) / n);
    double b = std::min(hi, best_p + (hi - lo) / n);
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = norm_sq(des.value(c, t) - x);
    double fd = norm_sq(des.value(d, t) - x);
    while (b - a > tol_ext * std::max(1.0, hi - lo)) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = norm_sq(des.value(c, t) - x);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = norm_sq(des.value(d, t) - x);
        }
    }
    return 0.5 * (a + b);
}

Vec2 ControlField::eval(Vec2 x, double t) const {
    if (analytic_override) return analytic_override(x, t);

    const double p_star = nearest_parameter(x, t);
    const double d = norm(des.value(p_star, t) - x);
    if (d >= tube_radius) return {0.0, 0.0};
    // complement of the quintic smoothstep: C^2, 1 at the curve, 0 at the rim
    const double s = d / tube_radius;
    const double beta = 1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
    const OnManifoldControl c = on_manifold(p_star, t);
    return c.g * beta;
}

Rhs ControlField::controlled_rhs() const {
    const VectorField2D* field = man->field;
    const double e = des.eps;
    // copy of *this keeps the closure self-contained (man/field stay borrowed)
    ControlField self = *this;
    return [field, e, self](Vec2 x, double t) -> Vec2 {
        return field->eval(x) + self.eval(x, t) * e;
    };
}

ControlField synthesize_control(const VectorField2D& field, const UnperturbedManifold& man,
                                const DesiredManifold& des, const SynthesisOptions& opt) {
    // 1. sanity of the inputs
    if (!(des.eps > 0.0)) throw config_error("synthesize_control: eps must be positive");
    if (man.field != &field) {
        throw config_error("synthesize_control: manifold was built from a different field");
    }

    // 2. resolve discretization parameters
    ControlField ctl;
    ctl.man = &man;
    ctl.des = des;
    ctl.h_t = opt.h_t > 0.0 ? opt.h_t
                            : 1e-3 * std::min(1.0 / man.saddle.lambda_u, 1.0);
    ctl.tube_radius = opt.tube_radius > 0.0 ? opt.tube_radius
                                            : 10.0 * des.eps * field.domain.diagonal();
    ctl.tol_ext = opt.tol_ext;
    ctl.search_samples = opt.search_samples;

    // 3. probe the projections across the covered box to surface bad targets early
    // 4. (the same sweep exercises the derivative stencils)
    const int np = 7, nt = 5;
    double sup_g = 0.0;
    for (int j = 0; j < nt; ++j) {
        const double t = man.time_anchor + j * (0.25 / (nt - 1));
        for (int i = 0; i < np; ++i) {
            const double a = man.p_min + (man.p_max - man.p_min) * (i + 0.5) / np;
            const double p = a - (t - man.time_anchor);
            const OnManifoldControl c = control_components(man, des, p, t, ctl.h_t);
            if (!std::isfinite(c.g_perp) || !std::isfinite(c.g_par)) {
                throw numerical_error("control synthesis produced non-finite components at p = " +
                                      std::to_string(p) + ", t = " + std::to_string(t));
            }
            sup_g = std::max(sup_g, norm(c.g));
        }
    }
    (void)sup_g;

    // 5. install the analytic override after checking it against the formulas.
    // Only the transverse projection is compared: the tangential component of
    // a valid override may differ from the transport formulas at O(eps)
    // (it merely reparametrizes motion along the curve), while the transverse
    // component on the target is pinned down by the construction.
    if (opt.analytic_override) {
        double worst = 0.0;
        for (int j = 0; j < nt; ++j) {
            const double t = man.time_anchor + j * (0.25 / (nt - 1));
            for (int i = 0; i < np; ++i) {
                const double a = man.p_min + (man.p_max - man.p_min) * (i + 0.5) / np;
                const double p = a - (t - man.time_anchor);
                const OnManifoldControl c = control_components(man, des, p, t, ctl.h_t);
                const Vec2 go = opt.analytic_override(des.value(p, t), t);
                const Vec2 f = field.eval(point_at(man, a));
                const double go_perp = dot(rotate90(f), go) / norm(f);
                const double scale = std::max(1.0, std::abs(c.g_perp));
                worst = std::max(worst, std::abs(go_perp - c.g_perp) / scale);
            }
        }
        if (worst > opt.cross_check_tol) {
            throw validation_error("analytic control override disagrees with the transverse "
                                   "component formula on the manifold (relative mismatch " +
                                   std::to_string(worst) + ")");
        }
        ctl.analytic_override = opt.analytic_override;
    }

    // 6. done
    return ctl;
}

void write_control_csv(std::ostream& os, const ControlField& ctl,
                       const std::vector<double>& p_grid, const std::vector<double>& t_grid) {
    char buf[512];
    os << "p,t,x,y,g_perp,g_par,g_x,g_y\n";
    for (double t : t_grid) {
        for (double p : p_grid) {
            const Vec2 xy = ctl.des.value(p, t);
            OnManifoldControl c;
            c.g_perp = c.g_par = c.g.x = c.g.y = std::nan("");
            try {
                c = ctl.on_manifold(p, t);
            } catch (const numerical_error&) {
                // time-derivative stencil left the window on the far side
                // (grid corner); emit the point with NaN control columns
            }
            std::snprintf(buf, sizeof buf,
                          "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p, t, xy.x, xy.y,
                          c.g_perp, c.g_par, c.g.x, c.g.y);
            os << buf;
        }
    }
}

} // namespace flowctl
