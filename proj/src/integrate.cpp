#include "flowctl/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace flowctl {

// ---------------------------------------------------------------- Trajectory

void Trajectory::append(double time, Vec2 pos, Vec2 vel) {
    if (!t.empty() && !(time > t.back())) {
        throw numerical_error("trajectory times must be strictly increasing");
    }
    t.push_back(time);
    x.push_back(pos);
    v.push_back(vel);
}

void Trajectory::reverse() {
    std::reverse(t.begin(), t.end());
    std::reverse(x.begin(), x.end());
    std::reverse(v.begin(), v.end());
}

size_t Trajectory::locate(double time) const {
    if (t.size() < 2) throw numerical_error("trajectory dense eval needs >= 2 samples");
    const double pad = 1e-9 * (t.back() - t.front());
    if (time < t.front() - pad || time > t.back() + pad) {
        throw numerical_error("trajectory eval outside [" + std::to_string(t.front()) + ", " +
                              std::to_string(t.back()) + "]: t = " + std::to_string(time));
    }
    auto it = std::upper_bound(t.begin(), t.end(), time);
    size_t i = static_cast<size_t>(it - t.begin());
    if (i == 0) i = 1;
    if (i >= t.size()) i = t.size() - 1;
    return i - 1;
}

Vec2 Trajectory::eval(double time) const {
    const size_t i = locate(time);
    const double h = t[i + 1] - t[i];
    const double s = (time - t[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return x[i] * h00 + v[i] * (h10 * h) + x[i + 1] * h01 + v[i + 1] * (h11 * h);
}

Vec2 Trajectory::deriv(double time) const {
    const size_t i = locate(time);
    const double h = t[i + 1] - t[i];
    const double s = (time - t[i]) / h;
    const double s2 = s * s;
    const double d00 = (6 * s2 - 6 * s) / h;
    const double d10 = 3 * s2 - 4 * s + 1;
    const double d01 = (-6 * s2 + 6 * s) / h;
    const double d11 = 3 * s2 - 2 * s;
    return x[i] * d00 + v[i] * d10 + x[i + 1] * d01 + v[i + 1] * d11;
}

// ------------------------------------------------------------------ steppers

namespace {

struct StepOut {
    Vec2 x;
    double err; // scaled error estimate (rk45), 0 for rk4
};

Vec2 rk4_step(const Rhs& f, Vec2 x, double t, double h) {
    const Vec2 k1 = f(x, t);
    const Vec2 k2 = f(x + k1 * (0.5 * h), t + 0.5 * h);
    const Vec2 k3 = f(x + k2 * (0.5 * h), t + 0.5 * h);
    const Vec2 k4 = f(x + k3 * h, t + h);
    return x + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
}

// Dormand-Prince 5(4)
StepOut dp54_step(const Rhs& f, Vec2 x, double t, double h, Vec2 k1,
                  double atol, double rtol, Vec2* k_last) {
    const Vec2 k2 = f(x + k1 * (h * (1.0 / 5)), t + h * (1.0 / 5));
    const Vec2 k3 = f(x + (k1 * (3.0 / 40) + k2 * (9.0 / 40)) * h, t + h * (3.0 / 10));
    const Vec2 k4 = f(x + (k1 * (44.0 / 45) - k2 * (56.0 / 15) + k3 * (32.0 / 9)) * h,
                      t + h * (4.0 / 5));
    const Vec2 k5 = f(x + (k1 * (19372.0 / 6561) - k2 * (25360.0 / 2187) +
                           k3 * (64448.0 / 6561) - k4 * (212.0 / 729)) * h,
                      t + h * (8.0 / 9));
    const Vec2 k6 = f(x + (k1 * (9017.0 / 3168) - k2 * (355.0 / 33) + k3 * (46732.0 / 5247) +
                           k4 * (49.0 / 176) - k5 * (5103.0 / 18656)) * h,
                      t + h);
    const Vec2 x5 = x + (k1 * (35.0 / 384) + k3 * (500.0 / 1113) + k4 * (125.0 / 192) -
                         k5 * (2187.0 / 6784) + k6 * (11.0 / 84)) * h;
    const Vec2 k7 = f(x5, t + h); // FSAL
    const Vec2 x4 = x + (k1 * (5179.0 / 57600) + k3 * (7571.0 / 16695) + k4 * (393.0 / 640) -
                         k5 * (92097.0 / 339200) + k6 * (187.0 / 2100) + k7 * (1.0 / 40)) * h;
    const Vec2 e = x5 - x4;
    const double scx = atol + rtol * std::max(std::abs(x.x), std::abs(x5.x));
    const double scy = atol + rtol * std::max(std::abs(x.y), std::abs(x5.y));
    const double err = std::sqrt(0.5 * ((e.x / scx) * (e.x / scx) + (e.y / scy) * (e.y / scy)));
    if (k_last) *k_last = k7;
    return {x5, err};
}

// locate the boundary crossing on a step via the Hermite cubic and bisection;
// returns (t_cross, last inside state)
std::pair<double, Vec2> bisect_exit(const Rect& box, double ta, Vec2 xa, Vec2 va,
                                    double tb, Vec2 xb, Vec2 vb) {
    Trajectory seg;
    const bool fwd = tb > ta;
    if (fwd) {
        seg.append(ta, xa, va);
        seg.append(tb, xb, vb);
    } else {
        seg.append(tb, xb, vb);
        seg.append(ta, xa, va);
    }
    double lo = ta, hi = tb; // lo inside, hi outside (in step direction)
    Vec2 inside = xa;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        const Vec2 xm = seg.eval(mid);
        if (box.contains(xm)) {
            lo = mid;
            inside = xm;
        } else {
            hi = mid;
        }
    }
    return {lo, inside};
}

// one driver for both storage modes: on_sample is called for every accepted
// step (and the initial point)
template <typename OnSample>
PointResult drive(const Rhs& rhs, Vec2 x0, double t0, double t1, const IntegratorConfig& cfg,
                  const Rect* escape, OnSample&& on_sample) {
    const double span = t1 - t0;
    if (span == 0.0) {
        on_sample(t0, x0, rhs(x0, t0));
        return {x0, false, t0};
    }
    const double dir = span > 0 ? 1.0 : -1.0;

    if (escape && !escape->contains(x0)) {
        throw escape_error("seed outside domain", t0, x0.x, x0.y);
    }

    Vec2 x = x0;
    double t = t0;
    Vec2 k1 = rhs(x, t);
    on_sample(t, x, k1);

    auto check = [&](double tn, Vec2 xn, Vec2 vn, double tp, Vec2 xp, Vec2 vp) -> bool {
        if (!std::isfinite(xn.x) || !std::isfinite(xn.y)) {
            throw numerical_error("non-finite state at t = " + std::to_string(tn));
        }
        if (escape && !escape->contains(xn)) {
            auto [tc, xc] = bisect_exit(*escape, tp, xp, vp, tn, xn, vn);
            throw escape_error("trajectory left the domain at t = " + std::to_string(tc), tc,
                               xc.x, xc.y);
        }
        return true;
    };

    // a span within a few ulps of the endpoint times (typical when a caller's
    // grid node lands almost-but-not-exactly on the seeding time) cannot be
    // subdivided by any stepper; one explicit step is exact to O(span^2)
    if (std::abs(span) <= 64.0 * std::numeric_limits<double>::epsilon() *
                              std::max({1.0, std::abs(t0), std::abs(t1)})) {
        const Vec2 xe{x.x + span * k1.x, x.y + span * k1.y};
        const Vec2 ve = rhs(xe, t1);
        check(t1, xe, ve, t0, x, k1);
        on_sample(t1, xe, ve);
        return {xe, false, t1};
    }

    if (cfg.method == StepMethod::rk4_fixed) {
        if (!(cfg.dt > 0.0)) throw config_error("rk4_fixed needs dt > 0");
        const long n = std::max<long>(1, static_cast<long>(std::ceil(std::abs(span) / cfg.dt)));
        if (n > cfg.max_steps) {
            throw numerical_error("step budget exceeded: " + std::to_string(n) + " > " +
                                  std::to_string(cfg.max_steps));
        }
        const double h = span / static_cast<double>(n);
        Vec2 vprev = k1;
        for (long i = 0; i < n; ++i) {
            const Vec2 xp = x;
            const double tp = t;
            x = rk4_step(rhs, x, t, h);
            t = t0 + span * static_cast<double>(i + 1) / static_cast<double>(n);
            const Vec2 vn = rhs(x, t);
            check(t, x, vn, tp, xp, vprev);
            on_sample(t, x, vn);
            vprev = vn;
        }
        return {x, false, t};
    }

    // rk45 adaptive
    const double max_step = cfg.max_step > 0.0 ? cfg.max_step : std::abs(span) / 10.0;
    double h = dir * std::min(std::abs(span) / 100.0, max_step);
    long steps = 0;
    while (dir * (t1 - t) > 0.0) {
        if (++steps > cfg.max_steps) {
            throw numerical_error("step budget exceeded (" + std::to_string(cfg.max_steps) +
                                  " steps) at t = " + std::to_string(t));
        }
        if (dir * (t + h - t1) > 0.0) h = t1 - t;
        Vec2 k_last;
        const StepOut s = dp54_step(rhs, x, t, h, k1, cfg.abs_tol, cfg.rel_tol, &k_last);
        if (std::isfinite(s.err) && s.err <= 1.0) {
            const Vec2 xp = x;
            const double tp = t;
            const Vec2 vp = k1;
            t += h;
            x = s.x;
            k1 = k_last;
            check(t, x, k1, tp, xp, vp);
            on_sample(t, x, k1);
            const double grow = s.err == 0.0 ? 5.0 : 0.9 * std::pow(s.err, -0.2);
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            const double shrink = std::isfinite(s.err) ? std::max(0.9 * std::pow(s.err, -0.2), 0.1)
                                                       : 0.1;
            h *= shrink;
        }
        if (std::abs(h) > max_step) h = dir * max_step;
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t))) {
            throw numerical_error("step size underflow at t = " + std::to_string(t));
        }
    }
    return {x, false, t1};
}

} // namespace

Trajectory integrate_ode(const Rhs& rhs, Vec2 x0, double t0, double t1,
                         const IntegratorConfig& cfg, const Rect* escape) {
    Trajectory tr;
    const bool backward = t1 < t0;
    drive(rhs, x0, t0, t1, cfg, escape, [&](double t, Vec2 x, Vec2 v) {
        // backward runs are collected in visit order (descending t), fixed below
        tr.t.push_back(t);
        tr.x.push_back(x);
        tr.v.push_back(v);
    });
    if (backward) tr.reverse();
    if (tr.size() == 1) { // zero-span request: duplicate so dense eval stays defined
        tr.t.push_back(std::nextafter(tr.t[0], std::numeric_limits<double>::infinity()));
        tr.x.push_back(tr.x[0]);
        tr.v.push_back(tr.v[0]);
    }
    return tr;
}

PointResult advance_point(const Rhs& rhs, Vec2 x0, double t0, double t1,
                          const IntegratorConfig& cfg, const Rect* escape) {
    try {
        return drive(rhs, x0, t0, t1, cfg, escape, [](double, Vec2, Vec2) {});
    } catch (const escape_error& e) {
        return {{e.x_exit, e.y_exit}, true, e.t_exit};
    }
}

FlowMapResult flow_map(const Rhs& rhs, const std::vector<Vec2>& seeds, double t0, double tau,
                       const IntegratorConfig& cfg, const Rect& domain, int threads) {
    FlowMapResult out;
    out.end.resize(seeds.size());
    out.escaped.assign(seeds.size(), 0);

    int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    n_threads = std::min<int>(n_threads, std::max<size_t>(seeds.size(), 1));

    auto worker = [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i) {
            const PointResult r = advance_point(rhs, seeds[i], t0, t0 + tau, cfg, &domain);
            out.end[i] = r.x;
            out.escaped[i] = r.escaped ? 1 : 0;
        }
    };
    if (n_threads == 1 || seeds.size() < 64) {
        worker(0, seeds.size());
        return out;
    }
    std::vector<std::thread> pool;
    const size_t chunk = (seeds.size() + n_threads - 1) / n_threads;
    for (int k = 0; k < n_threads; ++k) {
        const size_t lo = k * chunk;
        const size_t hi = std::min(seeds.size(), lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
    return out;
}

} // namespace flowctl
