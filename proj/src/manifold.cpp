#include "flowctl/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flowctl/errors.hpp"

namespace flowctl {

namespace {

// Simpson arclength of one Hermite interval [t_a, t_b] of a trajectory
double interval_arc(const Trajectory& tr, size_t i) {
    const double h = tr.t[i + 1] - tr.t[i];
    const double vm = norm(tr.deriv(0.5 * (tr.t[i] + tr.t[i + 1])));
    return h / 6.0 * (norm(tr.v[i]) + 4.0 * vm + norm(tr.v[i + 1]));
}

// Simpson arclength from node time t_a to an interior time tau (same interval)
double partial_arc(const Trajectory& tr, double t_a, double tau) {
    const double h = tau - t_a;
    if (h == 0.0) return 0.0;
    const double va = norm(tr.deriv(t_a));
    const double vm = norm(tr.deriv(t_a + 0.5 * h));
    const double vb = norm(tr.deriv(tau));
    return h / 6.0 * (va + 4.0 * vm + vb);
}

struct ArcLocate {
    bool found = false;
    double tau = 0.0;   // time at which arclength-from-start reaches target
    double total = 0.0; // arclength accumulated over the whole trajectory
};

// Walk a time-ascending trajectory in visit order (dir = +1 front-to-back,
// dir = -1 back-to-front), accumulating arclength on top of s_offset, and
// locate where it crosses s_target.
ArcLocate arc_locate(const Trajectory& tr, int dir, double s_offset, double s_target) {
    ArcLocate out;
    double s = s_offset;
    const size_t n = tr.size();
    for (size_t k = 0; k + 1 < n; ++k) {
        const size_t i = dir > 0 ? k : n - 2 - k;
        const double ds = interval_arc(tr, i);
        if (!out.found && s + ds >= s_target) {
            // bisect inside the interval, measuring from the visit-side node
            const double t_a = dir > 0 ? tr.t[i] : tr.t[i + 1];
            const double t_b = dir > 0 ? tr.t[i + 1] : tr.t[i];
            double lo = t_a, hi = t_b;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double sm = s + std::abs(partial_arc(tr, t_a, mid));
                (sm < s_target ? lo : hi) = mid;
            }
            out.found = true;
            out.tau = 0.5 * (lo + hi);
        }
        s += ds;
    }
    out.total = s;
    return out;
}

double grid_velocity_scale(const VectorField2D& field, int n = 33) {
    double vmax = 0.0;
    const Rect& d = field.domain;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Vec2 p{d.x_min + d.width() * i / (n - 1.0),
                         d.y_min + d.height() * j / (n - 1.0)};
            vmax = std::max(vmax, norm(field.eval(p)));
        }
    return vmax;
}

} // namespace

Vec2 UnperturbedManifold::pos_ext(double a) const {
    if (covers(a)) return pos(a);
    if (kind == ManifoldKind::stable && a > p_max) {
        const Vec2 base = pos(p_max) - saddle.a;
        return saddle.a + base * std::exp(saddle.lambda_s * (a - p_max));
    }
    if (kind == ManifoldKind::unstable && a < p_min) {
        const Vec2 base = pos(p_min) - saddle.a;
        return saddle.a + base * std::exp(saddle.lambda_u * (a - p_min));
    }
    throw numerical_error("manifold argument " + std::to_string(a) +
                          " outside coverage on the far side [" + std::to_string(p_min) + ", " +
                          std::to_string(p_max) + "]");
}

double UnperturbedManifold::speed_ext(double a) const {
    if (covers(a)) return speed(a);
    if (kind == ManifoldKind::stable && a > p_max) {
        return speed(p_max) * std::exp(saddle.lambda_s * (a - p_max));
    }
    if (kind == ManifoldKind::unstable && a < p_min) {
        return speed(p_min) * std::exp(saddle.lambda_u * (a - p_min));
    }
    throw numerical_error("manifold argument outside coverage on the far side");
}

double UnperturbedManifold::arclength(double p_from, double p_to) const {
    if (p_from > p_to) std::swap(p_from, p_to);
    if (!covers(p_from) || !covers(p_to)) {
        throw numerical_error("arclength query outside coverage");
    }
    auto cum_at = [&](double p) {
        auto it = std::upper_bound(curve.t.begin(), curve.t.end(), p);
        size_t i = static_cast<size_t>(it - curve.t.begin());
        if (i == 0) i = 1;
        if (i >= curve.t.size()) i = curve.t.size() - 1;
        --i;
        return cum_s[i] + std::abs(partial_arc(curve, curve.t[i], p));
    };
    return cum_at(p_to) - cum_at(p_from);
}

double UnperturbedManifold::slice_arclength(double t, double p_lo, double p_hi) const {
    double a_lo = std::max(p_min, arg(p_lo, t));
    double a_hi = std::min(p_max, arg(p_hi, t));
    if (!(a_hi > a_lo)) return 0.0;
    return arclength(a_lo, a_hi);
}

UnperturbedManifold compute_manifold(const VectorField2D& field, const SaddleData& saddle,
                                     ManifoldKind kind, double p_end, double time_anchor,
                                     const ManifoldOptions& opt) {
    const double diag = field.domain.diagonal();
    const double delta = opt.delta_frac * diag;
    const double d0 = opt.anchor_arclength < 0.0 ? 0.1 * diag : opt.anchor_arclength;
    const double vel_scale = grid_velocity_scale(field);
    const double eta = opt.eta_frac * vel_scale;
    if (!(d0 > delta)) {
        throw config_error("anchor arclength must exceed the seed offset");
    }

    const int dir = kind == ManifoldKind::stable ? -1 : +1;
    const Vec2 v = kind == ManifoldKind::stable ? saddle.v_s : saddle.v_u;
    const double sigma = opt.branch >= 0 ? 1.0 : -1.0;
    const Vec2 seed = saddle.a + v * (sigma * delta);
    if (!field.domain.contains(seed)) {
        throw validation_error("manifold seed lies outside the domain");
    }

    Rhs rhs = [&field](Vec2 x, double) { return field.eval(x); };

    // phase 1: march away from the saddle until the anchor arclength is reached
    double tau0 = 0.0;
    {
        bool found = false;
        double s = delta; // arclength measured from the saddle
        Vec2 x = seed;
        double tau = 0.0;
        for (int c = 0; c < opt.max_chunks && !found; ++c) {
            Trajectory chunk;
            try {
                chunk = integrate_ode(rhs, x, tau, tau + dir * opt.chunk, opt.integ,
                                      &field.domain);
            } catch (const escape_error& e) {
                throw validation_error(
                    "manifold leaves the domain (t = " + std::to_string(e.t_exit) +
                    ") before reaching the anchor arclength " + std::to_string(d0));
            }
            const ArcLocate loc = arc_locate(chunk, dir, s, d0);
            if (loc.found) {
                tau0 = loc.tau;
                found = true;
            }
            s = loc.total;
            tau += dir * opt.chunk;
            x = dir > 0 ? chunk.x.back() : chunk.x.front();
        }
        if (!found) {
            throw validation_error("anchor arclength " + std::to_string(d0) +
                                   " not reached within the chunk budget");
        }
    }

    // seed parameter (near-saddle coverage end) and far-end integration target
    const double p_seed = -tau0;
    const double tau_far = p_end + tau0;
    if (dir * (tau_far - 0.0) <= 0.0) {
        std::ostringstream ss;
        ss << "manifold endpoint " << p_end << " is on the saddle side of the seed parameter "
           << p_seed;
        throw validation_error(ss.str());
    }

    // phase 2: one clean integration over the full parameter range
    Trajectory curve;
    try {
        curve = integrate_ode(rhs, seed, 0.0, tau_far, opt.integ, &field.domain);
    } catch (const escape_error& e) {
        throw validation_error("manifold leaves the domain at parameter " +
                               std::to_string(e.t_exit - tau0) + " before reaching " +
                               std::to_string(p_end));
    }
    for (double& tt : curve.t) tt -= tau0; // node times become manifold parameters

    // trim to the maximal |f| >= eta block around the anchor
    const size_t n = curve.size();
    size_t i_anchor = 0;
    for (size_t i = 0; i < n; ++i) {
        if (std::abs(curve.t[i]) < std::abs(curve.t[i_anchor])) i_anchor = i;
    }
    size_t i_lo = i_anchor, i_hi = i_anchor;
    while (i_lo > 0 && norm(curve.v[i_lo - 1]) >= eta) --i_lo;
    while (i_hi + 1 < n && norm(curve.v[i_hi + 1]) >= eta) ++i_hi;
    if (i_lo > 0 || i_hi + 1 < n) {
        const double lo_p = curve.t[i_lo], hi_p = curve.t[i_hi];
        const bool covers_end = kind == ManifoldKind::stable ? lo_p <= p_end + 1e-12
                                                             : hi_p >= p_end - 1e-12;
        if (!covers_end) {
            throw validation_error("|f| drops below eta at parameter " +
                                   std::to_string(kind == ManifoldKind::stable ? lo_p : hi_p) +
                                   "; cannot cover requested endpoint " + std::to_string(p_end));
        }
        curve.t.assign(curve.t.begin() + i_lo, curve.t.begin() + i_hi + 1);
        curve.x.assign(curve.x.begin() + i_lo, curve.x.begin() + i_hi + 1);
        curve.v.assign(curve.v.begin() + i_lo, curve.v.begin() + i_hi + 1);
    }

    UnperturbedManifold man;
    man.kind = kind;
    man.saddle = saddle;
    man.time_anchor = time_anchor;
    man.anchor_arclength = d0;
    man.eta = eta;
    man.seed_gap = delta;
    man.curve = std::move(curve);
    man.p_min = man.curve.t.front();
    man.p_max = man.curve.t.back();
    man.p_cap = kind == ManifoldKind::stable ? man.p_max : man.p_min;
    man.field = &field;

    man.cum_s.resize(man.curve.size());
    man.cum_s[0] = 0.0;
    for (size_t i = 0; i + 1 < man.curve.size(); ++i) {
        man.cum_s[i + 1] = man.cum_s[i] + interval_arc(man.curve, i);
    }
    return man;
}

Vec2 DesiredManifold::dp(double p, double t) const {
    if (target_dp) return target_dp(p, t);
    const double h = h_p * (1.0 + std::abs(p));
    return (target(p + h, t) - target(p - h, t)) / (2.0 * h);
}

MappabilityWindow mappability_window(const UnperturbedManifold& man, const DesiredManifold& des,
                                     double t, const std::vector<double>& p_grid,
                                     double slope_tol) {
    MappabilityWindow win;
    win.t = t;

    std::vector<double> ps, qs, rs;
    std::vector<uint8_t> ok;
    for (double p : p_grid) {
        const double a = man.arg(p, t);
        if (!man.covers(a)) continue;
        const Vec2 y = man.pos(a);
        const Vec2 fy = man.vel(a);
        const double fn = norm(fy);
        ps.push_back(p);
        qs.push_back(0.0);
        rs.push_back(0.0);
        ok.push_back(0);
        if (fn < man.eta) continue;

        // solve f(y)^T (target(q,t) - y) = 0 for the parameter q of the
        // target point on the normal line through y
        auto F = [&](double q) { return dot(fy, des.value(q, t) - y); };
        double w = 0.25 * (1.0 + std::abs(p));
        double qa = p - w, qb = p + w;
        double Fa = F(qa), Fb = F(qb);
        int expand = 0;
        while (Fa * Fb > 0.0 && expand < 6) {
            w *= 2.0;
            qa = p - w;
            qb = p + w;
            Fa = F(qa);
            Fb = F(qb);
            ++expand;
        }
        if (Fa * Fb > 0.0) continue; // no crossing: unusable point
        for (int it = 0; it < 80; ++it) {
            const double qm = 0.5 * (qa + qb);
            const double Fm = F(qm);
            if (Fa * Fm <= 0.0) {
                qb = qm;
            } else {
                qa = qm;
                Fa = Fm;
            }
        }
        const double q = 0.5 * (qa + qb);
        const Vec2 nrm = rotate90(fy) / fn;
        qs.back() = q;
        rs.back() = dot(nrm, des.value(q, t) - y);
        ok.back() = 1;
    }

    // largest contiguous run with usable points and strictly monotone q
    size_t best_lo = 0, best_len = 0;
    size_t k = 0;
    while (k < ps.size()) {
        if (!ok[k]) {
            ++k;
            continue;
        }
        size_t end = k;
        while (end + 1 < ps.size() && ok[end + 1] &&
               (qs[end + 1] - qs[end]) / (ps[end + 1] - ps[end]) > slope_tol) {
            ++end;
        }
        if (end - k + 1 > best_len) {
            best_len = end - k + 1;
            best_lo = k;
        }
        k = end + 1;
    }

    if (best_len < 2) {
        throw validation_error("empty mappability window at t = " + std::to_string(t));
    }
    win.p_lo = ps[best_lo];
    win.p_hi = ps[best_lo + best_len - 1];
    win.monotone = true;
    for (size_t i = best_lo; i < best_lo + best_len; ++i) {
        win.p.push_back(ps[i]);
        win.q.push_back(qs[i]);
        win.r.push_back(rs[i]);
    }
    return win;
}

ValidationReport validate_desired(const VectorField2D& field, const UnperturbedManifold& man,
                                  const DesiredManifold& des, const std::vector<double>& p_grid,
                                  const std::vector<double>& t_grid, const ValidateOptions& opt) {
    ValidationReport rep;
    const double eps = des.eps;
    const double diag = field.domain.diagonal();
    if (!(eps > 0.0)) throw config_error("desired manifold needs eps > 0");

    // closeness and smoothness sups over the covered part of the grid
    for (double t : t_grid) {
        for (double p : p_grid) {
            const double a = man.arg(p, t);
            if (!man.covers(a)) continue;
            const Vec2 y = man.pos(a);
            const Vec2 fy = man.vel(a);
            const Vec2 d0 = des.value(p, t) - y;
            const Vec2 d1 = des.dp(p, t) - fy;
            rep.C_closeness = std::max(rep.C_closeness, (norm(d0) + norm(d1)) / eps);
            const double hp = des.h_p * (1.0 + std::abs(p));
            const Vec2 dpp = (des.dp(p + hp, t) - des.dp(p - hp, t)) / (2.0 * hp);
            rep.K_smoothness = std::max(rep.K_smoothness, norm(des.dp(p, t)) + norm(dpp));
        }
    }

    // congruence of the t = 0 seeding slice
    rep.congruent = true;
    for (double p : p_grid) {
        const double a = man.arg(p, 0.0);
        if (!man.covers(a)) continue;
        const Vec2 y = man.pos(a);
        const Vec2 fy = man.vel(a);
        const double res = std::abs(dot(fy, des.value(p, 0.0) - y));
        const double tol = opt.tol_cong_frac * norm(fy) * eps * diag;
        if (res > rep.congruence_max) {
            rep.congruence_max = res;
            rep.congruence_tol = tol;
        }
        if (res > tol) {
            rep.congruent = false;
            rep.failures.push_back({"congruence residual exceeds tolerance", p, 0.0, res, tol});
        }
    }

    // Cauchy test of the far-saddle offset limit
    {
        const double t_ref = t_grid.empty() ? man.time_anchor : t_grid.front();
        Vec2 d[4];
        for (int j = 0; j < 4; ++j) {
            // pick pj so that arg(pj, t_ref) = p_cap * 2^j (deep saddle approach)
            const double aj = man.p_cap * static_cast<double>(1 << j);
            const double pj = aj - (t_ref - man.time_anchor);
            d[j] = (des.value(pj, t_ref) - man.pos_ext(aj)) / eps;
        }
        // a single consecutive difference can be accidentally small when the
        // oscillatory part of the offset changes phase, so require contraction
        // against the larger of the first two steps
        const double step1 = norm(d[1] - d[0]);
        const double step2 = norm(d[2] - d[1]);
        const double step3 = norm(d[3] - d[2]);
        const double ref = std::max(step1, step2);
        rep.limit_ok = step3 <= std::max(0.6 * ref, 1e-9);
        if (!rep.limit_ok) {
            rep.failures.push_back(
                {"far-saddle offset limit: Cauchy differences not contracting", man.p_cap, t_ref,
                 step3, 0.6 * ref});
        }
    }

    // mappability windows per requested time
    for (double t : t_grid) {
        try {
            rep.windows.push_back(mappability_window(man, des, t, p_grid, opt.slope_tol));
        } catch (const validation_error& e) {
            MappabilityWindow w;
            w.t = t;
            rep.windows.push_back(w);
            rep.failures.push_back({std::string("mappability: ") + e.what(), 0.0, t, 0.0, 0.0});
        }
    }
    return rep;
}

} // namespace flowctl
