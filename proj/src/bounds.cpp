#include "flowctl/bounds.hpp"

#include <cmath>

#include "flowctl/errors.hpp"
#include "flowctl/integrate.hpp"

namespace flowctl {

BoundConstants estimate_constants(const VectorField2D& field, const ControlField* ctl,
                                  const ConstantsOptions& opt) {
    BoundConstants bc;
    const Rect& d = field.domain;
    const double hg = 1e-5 * d.diagonal();

    double prev_f = -1.0, prev_df = -1.0, prev_d2f = -1.0, prev_g = -1.0;
    bc.converged = true;
    for (int k = 0; k <= opt.doublings; ++k) {
        const int n = opt.n0 << k;
        double sf = 0.0, sdf = 0.0, sd2f = 0.0, sg = 0.0;
        for (int j = 0; j < n; ++j) {
            const double y = d.y_min + d.height() * (j + 0.5) / n;
            for (int i = 0; i < n; ++i) {
                const Vec2 x{d.x_min + d.width() * (i + 0.5) / n, y};
                sf = std::max(sf, norm(field.eval(x)));
                sdf = std::max(sdf, spectral_norm(field.jacobian(x)));
                const auto H = field.hessian(x);
                sd2f = std::max(sd2f, std::max(frob_norm(H[0]), frob_norm(H[1])));
                if (ctl) {
                    for (double t : opt.t_samples) {
                        const Vec2 g = ctl->eval(x, t);
                        const Vec2 gxp = ctl->eval({x.x + hg, x.y}, t);
                        const Vec2 gxm = ctl->eval({x.x - hg, x.y}, t);
                        const Vec2 gyp = ctl->eval({x.x, x.y + hg}, t);
                        const Vec2 gym = ctl->eval({x.x, x.y - hg}, t);
                        const Mat2 Dg{(gxp.x - gxm.x) / (2 * hg), (gyp.x - gym.x) / (2 * hg),
                                      (gxp.y - gxm.y) / (2 * hg), (gyp.y - gym.y) / (2 * hg)};
                        sg = std::max(sg, norm(g) + frob_norm(Dg));
                    }
                }
            }
        }
        auto moved = [&](double now, double before) {
            return before >= 0.0 && std::abs(now - before) > opt.conv_tol * std::max(now, 1e-300);
        };
        if (k == opt.doublings) {
            bc.converged = !(moved(sf, prev_f) || moved(sdf, prev_df) || moved(sd2f, prev_d2f) ||
                             (ctl && moved(sg, prev_g)));
        }
        prev_f = sf;
        prev_df = sdf;
        prev_d2f = sd2f;
        prev_g = sg;
        bc.sup_f = sf;
        bc.sup_Df = sdf;
        bc.sup_D2f = sd2f;
        bc.C_g = sg;
    }
    return bc;
}

ErrorBounds::ErrorBounds(const UnperturbedManifold& man, double C_f, double quad_tol)
    : man_(&man), C_f_(C_f), s_min_(man.p_min), s_max_(man.p_max) {
    const bool stable = man.kind == ManifoldKind::stable;
    lam_near_ = stable ? man.saddle.lambda_u : -man.saddle.lambda_s;

    IntegratorConfig cfg;
    cfg.abs_tol = cfg.rel_tol = 1e-3 * quad_tol;
    // the second quadrature reads (G, K) through the dense interpolant, so the
    // node spacing (h^4 interpolation error) sets the bias floor, not the
    // stepper tolerance; span/2000 keeps it below ~1e-10 relative
    cfg.max_step = (s_max_ - s_min_) / 2000.0;

    // cumulative trace and weighted-speed integrals: d/ds (G, K) = (tr Df, |f| e^-G)
    Rhs gk_rhs = [this](Vec2 state, double s) -> Vec2 {
        const Vec2 y = man_->pos(s);
        const double tr = man_->field->jacobian(y).trace();
        return {tr, norm(man_->field->eval(y)) * std::exp(-state.x)};
    };
    gk_ = integrate_ode(gk_rhs, {0.0, 0.0}, s_min_, s_max_, cfg);

    if (stable) {
        // remaining integral past the cap, with |f| ~ e^{lambda_s (s - cap)}
        K_end_ = K_at(s_max_) +
                 man.speed(s_max_) * std::exp(-G_at(s_max_)) / man.saddle.lambda_u;
    } else {
        K_end_ = -man.speed(s_min_) * std::exp(-G_at(s_min_)) / (-man.saddle.lambda_s);
    }

    Rhs phi_rhs = [this, stable](Vec2, double s) -> Vec2 {
        const double f = man_->speed(s);
        const double K = K_at(s);
        const double R = std::exp(G_at(s)) * (stable ? K_end_ - K : K - K_end_);
        return {(f + 2.0 * C_f_ * R) / (f * f), 0.0};
    };
    phi_ = integrate_ode(phi_rhs, {0.0, 0.0}, s_min_, s_max_, cfg);
}

double ErrorBounds::phi(double sigma) const { return man_->speed_ext(sigma); }

double ErrorBounds::perp_quotient(double sigma) const {
    const bool stable = man_->kind == ManifoldKind::stable;
    if (stable && sigma > s_max_) return 1.0 / lam_near_;
    if (!stable && sigma < s_min_) return 1.0 / lam_near_;
    if (sigma < s_min_ || sigma > s_max_) {
        throw numerical_error("perpendicular estimate queried outside manifold coverage: sigma = " +
                              std::to_string(sigma));
    }
    const double K = K_at(sigma);
    const double num = stable ? K_end_ - K : K - K_end_;
    return std::exp(G_at(sigma)) * num / man_->speed(sigma);
}

double ErrorBounds::par_integral(double sigma) const {
    const bool stable = man_->kind == ManifoldKind::stable;
    if (sigma >= s_min_ && sigma <= s_max_) return phi_.eval(sigma).x;
    if (stable && sigma > s_max_) {
        const double lam_s = man_->saddle.lambda_s;
        const double f_cap = man_->speed(s_max_);
        const double grow = (std::exp(-lam_s * (sigma - s_max_)) - 1.0) / (-lam_s);
        return phi_.eval(s_max_).x + (1.0 + 2.0 * C_f_ / lam_near_) / f_cap * grow;
    }
    if (!stable && sigma < s_min_) {
        const double lam_u = man_->saddle.lambda_u;
        const double f_cap = man_->speed(s_min_);
        const double grow = (std::exp(-lam_u * (sigma - s_min_)) - 1.0) / (-lam_u);
        return phi_.eval(s_min_).x + (1.0 + 2.0 * C_f_ / lam_near_) / f_cap * grow;
    }
    throw numerical_error("tangential estimate queried outside manifold coverage: sigma = " +
                          std::to_string(sigma));
}

double ErrorBounds::perp(const BoundConstants& bc, double p, double t) const {
    return bc.prefactor() * bc.eps * bc.eps * perp_quotient(man_->arg(p, t));
}

double ErrorBounds::par(const BoundConstants& bc, double p, double t) const {
    const double s_t = man_->arg(p, t);
    const double s_0 = man_->arg(p, 0.0);
    const double dPhi = par_integral(s_t) - par_integral(s_0);
    return bc.prefactor() * bc.eps * bc.eps * man_->speed_ext(s_t) * std::abs(dPhi);
}

double ErrorBounds::perp_limit_near_saddle(const BoundConstants& bc) const {
    return bc.prefactor() * bc.eps * bc.eps / lam_near_;
}

} // namespace flowctl
