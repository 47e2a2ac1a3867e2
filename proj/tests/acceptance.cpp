// Acceptance gate for the controlled-manifold toolkit. Run with a number 1..8
// to execute a single check, or with no argument to execute all of them. Each
// check prints exactly one [PASS]/[FAIL] line; the exit code is nonzero if any
// executed check failed. Tolerances are pinned below and are not configurable.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "flowctl/bounds.hpp"
#include "flowctl/control.hpp"
#include "flowctl/ftle.hpp"
#include "flowctl/geometry.hpp"
#include "flowctl/integrate.hpp"
#include "flowctl/manifold.hpp"
#include "flowctl/taylor_green.hpp"
#include "flowctl/vector_field.hpp"

#include "fixtures.hpp"

using namespace flowctl;

namespace {

// Hard harness precondition (sample counts, frozen constants). Exits
// immediately so a broken harness can never produce a vacuous pass.
#define REQUIRE(cond, msg)                                                       \
    do {                                                                         \
        if (!(cond)) {                                                           \
            std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << "  " << msg \
                      << "\n";                                                   \
            std::exit(1);                                                        \
        }                                                                        \
    } while (0)

std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return std::string(buf);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = a + (b - a) * i / (n - 1);
    return v;
}

constexpr double kPi = std::numbers::pi;
const TaylorGreenParams kPrm{}; // U = L = 1 throughout

// Closed-form transverse control component on the channel manifold (U = L = 1).
// The sign in the exponent follows the ripple decay direction of the target.
double oracle_gperp(ManifoldKind kind, double T, double p, double t) {
    const double sgn = kind == ManifoldKind::stable ? -1.0 : 1.0;
    const double y = tg::y_het(kPrm, t - T + p);
    const double w = t - p;
    return -std::exp(sgn * p) * (std::sin(w) + kPi * kPi * std::cos(kPi * y) * std::cos(w));
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

// ---- shared building blocks (stable case and its unstable mirror) ----------

struct OracleStats {
    double rel_perp = 0.0;
    double rel_par = 0.0;
    int n = 0;
};

// Generic (finite-difference) synthesis against the closed-form transverse
// component over a (p, t) rectangle, clipped to covered curve arguments. The
// time stencil must stay off the far (non-saddle) coverage end.
OracleStats oracle_compare(const VectorField2D& field, const UnperturbedManifold& man,
                           ManifoldKind kind, double T, double t_lo, double t_hi) {
    DesiredManifold des = tg::make_desired(kPrm, kind, 0.1, T);
    ControlField ctl = synthesize_control(field, man, des, {}); // no override

    double sup_err = 0.0, sup_par = 0.0, sup_scale = 0.0;
    int n = 0;
    for (double p : linspace(man.p_min, man.p_max, 61)) {
        for (double t : linspace(t_lo, t_hi, 21)) {
            const double a = man.arg(p, t);
            if (!man.covers(a)) continue;
            if (kind == ManifoldKind::stable && a - 3.0 * ctl.h_t < man.p_min) continue;
            if (kind == ManifoldKind::unstable && a + 3.0 * ctl.h_t > man.p_max) continue;
            const OnManifoldControl c = ctl.on_manifold(p, t);
            const double go = oracle_gperp(kind, T, p, t);
            sup_err = std::max(sup_err, std::abs(c.g_perp - go));
            sup_par = std::max(sup_par, std::abs(c.g_par));
            sup_scale = std::max(sup_scale, std::abs(go));
            ++n;
        }
    }
    REQUIRE(n >= 500, "oracle comparison: too few covered samples");
    REQUIRE(sup_scale > 1.0, "oracle comparison: degenerate scale");
    return {sup_err / sup_scale, sup_par / sup_scale, n};
}

ControlField make_closed_form_control(const VectorField2D& field, const UnperturbedManifold& man,
                                      ManifoldKind kind, double T, double eps,
                                      DesiredManifold& des_out) {
    des_out = tg::make_desired(kPrm, kind, eps, T);
    SynthesisOptions opt;
    opt.analytic_override = tg::make_control(kPrm, kind, T);
    return synthesize_control(field, man, des_out, opt);
}

// Measurement times for the trajectory checks: the inner unit stretch of the
// working range next to the anchor time, positioned so the t = 0 seeding
// slice is one of the nodes (snapped exactly onto zero, so the seeding rows
// measure identically-zero error instead of one-ulp integration spans).
std::vector<double> working_t_grid(ManifoldKind kind, double T) {
    const double lo = kind == ManifoldKind::stable ? T + 0.2 : T - 1.2;
    std::vector<double> ts = linspace(lo, lo + 1.0, 21);
    for (double& t : ts)
        if (std::abs(t) < 1e-12) t = 0.0;
    return ts;
}

// Transverse-amplification band admitted into the scaling sup. The quotient is
// the perpendicular estimate stripped of its prefactor and of eps^2 -- the
// shape of the predicted response along the manifold. Below the floor (1.5x
// the near-saddle plateau 1/pi^2) the predicted response sits under the
// wall-distance scale of the channel ends, so trajectories there measure wall
// wander rather than the tracked offset; above the ceiling the response at
// the largest swept amplitude reaches the channel scale and leaves the linear
// regime that the order statement describes.
constexpr double kQuotFloor = 1.5 / (kPi * kPi);
constexpr double kQuotCeil = 2.5;

// Quadratic smallness in the control amplitude: least-squares slope of
// ln sup|e_perp| against ln eps over {0.05, 0.1, 0.2} must sit in [1.7, 2.3].
// The sup at every amplitude scans one common sample set: trajectories seeded
// on the t = 0 slice of the validated window, sampled at (p, t) inside the
// mappability window at their own time, with bounded seeding gain, no domain
// escape at any of the three amplitudes, and amplification profile inside the
// band above.
bool slope_check(const VectorField2D& field, const UnperturbedManifold& man, ManifoldKind kind,
                 double T, const std::vector<double>& t_grid, std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> p_grid = linspace(man.p_min, man.p_max, 81);

    // windows at the reference amplitude, so the admitted set is identical
    // across the swept amplitudes
    const DesiredManifold des_ref = tg::make_desired(kPrm, kind, 0.1, T);
    std::map<double, std::pair<double, double>> win;
    for (double t : t_grid) {
        const MappabilityWindow w = mappability_window(man, des_ref, t, p_grid);
        if (!w.empty()) win[t] = {w.p_lo, w.p_hi};
    }
    const MappabilityWindow w0 = mappability_window(man, des_ref, 0.0, p_grid);
    REQUIRE(!w0.empty(), "scaling check: empty window at the seeding time");
    const ErrorBounds eb(man, 1.0); // the amplification profile does not involve C_f

    const std::array<double, 3> epss{0.05, 0.1, 0.2};
    std::vector<std::array<double, 3>> e(p_grid.size() * t_grid.size());
    std::vector<std::array<bool, 3>> usable(e.size());
    for (size_t ie = 0; ie < epss.size(); ++ie) {
        DesiredManifold des;
        ControlField ctl = make_closed_form_control(field, man, kind, T, epss[ie], des);
        const auto recs = measure_manifold_error(ctl.controlled_rhs(), man, des, p_grid, t_grid,
                                                 field.domain, {});
        REQUIRE(recs.size() == e.size(), "scaling check: record layout mismatch");
        for (size_t k = 0; k < recs.size(); ++k) {
            e[k][ie] = std::abs(recs[k].e_perp);
            usable[k][ie] = recs[k].reliable && !recs[k].escaped;
        }
    }

    int n = 0;
    std::array<double, 3> sup{0.0, 0.0, 0.0};
    size_t k = 0;
    for (double p : p_grid)
        for (double t : t_grid) {
            const size_t kk = k++;
            if (!(usable[kk][0] && usable[kk][1] && usable[kk][2])) continue;
            if (t == 0.0) continue; // seeding slice: zero by construction
            const auto w = win.find(t);
            if (w == win.end() || p < w->second.first || p > w->second.second) continue;
            if (p < w0.p_lo || p > w0.p_hi) continue; // seed started outside the window
            const double q = eb.perp_quotient(man.arg(p, t));
            if (q < kQuotFloor || q > kQuotCeil) continue;
            ++n;
            for (int ie = 0; ie < 3; ++ie) sup[ie] = std::max(sup[ie], e[kk][ie]);
        }
    REQUIRE(n >= 80, "scaling check: too few admissible samples");
    std::vector<double> lx, ly;
    std::string sups;
    for (size_t ie = 0; ie < epss.size(); ++ie) {
        REQUIRE(sup[ie] > 1e-12, "scaling check: degenerate transverse error");
        lx.push_back(std::log(epss[ie]));
        ly.push_back(std::log(sup[ie]));
        sups += fmt(" %.2e", sup[ie]);
    }
    const double slope = ls_slope(lx, ly);
    const double el = seconds_since(t0);
    detail = fmt("sup|e_perp| over %d admissible window samples at eps {0.05, 0.1, 0.2} =%s; "
                 "log-log slope %.3f (need [1.7, 2.3]); %.0f s (limit 300)",
                 n, sups.c_str(), slope, el);
    return slope >= 1.7 && slope <= 2.3 && el < 300.0;
}

// Measured transverse/tangential errors against the evaluated estimates, with
// constants taken from grid sampling (field, control) and from the validated
// closeness of the target (C_m). The samples scan the mappability window at
// each grid time; seeds that leave the domain before their sample time carry
// no measurement and are masked (their count is reported). A fixed 1e-12
// allowance absorbs the seeding-slice roundoff, where both the measurement
// and the tangential estimate vanish in exact arithmetic.
bool domination_check(const VectorField2D& field, const UnperturbedManifold& man,
                      ManifoldKind kind, double T, const std::vector<double>& t_grid,
                      std::string& detail) {
    const double eps = 0.1;
    const double slack = 1e-12;
    DesiredManifold des;
    ControlField ctl = make_closed_form_control(field, man, kind, T, eps, des);

    const std::vector<double> p_grid = linspace(man.p_min, man.p_max, 81);
    const ValidationReport rep = validate_desired(field, man, des, p_grid, t_grid, {});
    REQUIRE(rep.congruent, "domination check: seeding slice not congruent");
    REQUIRE(rep.C_closeness > 0.0, "domination check: degenerate closeness constant");
    std::map<double, std::pair<double, double>> win;
    for (const auto& w : rep.windows)
        if (!w.empty()) win[w.t] = {w.p_lo, w.p_hi};

    BoundConstants bc = estimate_constants(field, &ctl);
    bc.C_m = rep.C_closeness;
    bc.eps = eps;
    const ErrorBounds eb(man, bc.C_f());

    const auto recs = measure_manifold_error(ctl.controlled_rhs(), man, des, p_grid, t_grid,
                                             field.domain, {});
    const double t_lo = *std::min_element(t_grid.begin(), t_grid.end());
    const double t_hi = *std::max_element(t_grid.begin(), t_grid.end());
    int n = 0, n_dom = 0, n_int = 0, n_int_dom = 0, n_esc = 0;
    for (const auto& r : recs) {
        const auto w = win.find(r.t);
        if (w == win.end() || r.p < w->second.first || r.p > w->second.second) continue;
        // a trajectory that left the domain before its sample time yields a
        // frozen placeholder, not a measurement of the manifold error
        if (r.escaped) {
            ++n_esc;
            continue;
        }
        const bool dom = std::abs(r.e_perp) <= eb.perp(bc, r.p, r.t) + slack &&
                         std::abs(r.e_par) <= eb.par(bc, r.p, r.t) + slack;
        ++n;
        n_dom += dom ? 1 : 0;
        const double width = w->second.second - w->second.first;
        const bool interior = r.p >= w->second.first + 0.25 * width &&
                              r.p <= w->second.second - 0.25 * width &&
                              r.t >= t_lo + 0.25 * (t_hi - t_lo) &&
                              r.t <= t_lo + 0.75 * (t_hi - t_lo);
        if (interior) {
            ++n_int;
            n_int_dom += dom ? 1 : 0;
        }
    }
    REQUIRE(n >= 500, "domination check: too few measured window samples");
    REQUIRE(n_int >= 100, "domination check: too few interior samples");
    const double frac = static_cast<double>(n_dom) / n;
    detail = fmt("estimates dominate at %.1f%% of %d window samples (need >= 95%%), "
                 "%d/%d interior samples (need all), %d escaped seeds masked; "
                 "C_m %.2f, C_g %.1f%s",
                 100.0 * frac, n, n_int_dom, n_int, n_esc, bc.C_m, bc.C_g,
                 bc.converged ? "" : " (grid refinement of C_g not converged; see README)");
    return frac >= 0.95 && n_int_dom == n_int;
}

// FTLE of the controlled flow on the reference 512x256 grid over one time unit.
// The controlled field is defined on the whole plane (entire base flow, ripple
// clamped at the strip edges), so stencil trajectories pushed through a cell
// wall by the control remain integrable and must not be escape-masked: the
// wall-crossers are exactly the stencils that straddle the manifold where it
// dives toward the saddle corner, and masking them hands the per-row argmax to
// the off-manifold shear shoulder a few cells away.
ScalarFieldGrid controlled_ftle(const VectorField2D& field, const UnperturbedManifold& man,
                                ManifoldKind kind, double T, double eps, double t0) {
    DesiredManifold des;
    ControlField ctl = make_closed_form_control(field, man, kind, T, eps, des);
    const IntegratorConfig icfg{StepMethod::rk4_fixed, 1e-9, 1e-9, 1.0 / 256.0, 0.0, 2000000};
    const Rect whole_plane{-1e300, 1e300, -1e300, 1e300};
    return compute_ftle(ctl.controlled_rhs(), field.domain, 512, 256, t0, 1.0, icfg,
                        whole_plane);
}

struct RidgeStat {
    double max_dev = 0.0;
    int rows = 0;
    int invalid = 0;
};

// per-row deviation of the extracted ridge from the target slice, over rows
// with y in (y_lo, y_hi) and the ridge band x in [0.7, 1.3]
RidgeStat ridge_deviation(const ScalarFieldGrid& g, ManifoldKind kind, double eps, double T,
                          double t0, double y_lo, double y_hi) {
    const auto ridge = extract_ridge(g, 0.7, 1.3);
    RidgeStat st;
    for (const auto& rp : ridge) {
        if (rp.y <= y_lo || rp.y >= y_hi) continue;
        ++st.rows;
        if (!rp.valid) {
            ++st.invalid;
            continue;
        }
        const double xs = tg::slice_x(kPrm, kind, eps, T, rp.y, t0);
        st.max_dev = std::max(st.max_dev, std::abs(rp.x - xs));
    }
    return st;
}

// ---- the eight checks -------------------------------------------------------

bool crit1(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    const OracleStats s =
        oracle_compare(fix::tg_field(), fix::tg_manifold(), ManifoldKind::stable, -1.0, -1.0, 0.0);
    const double el = seconds_since(t0);
    detail = fmt("synthesized vs closed-form transverse component: rel sup %.2e, "
                 "tangential/scale %.2e (tol 1e-3 each), %d samples, %.1f s (limit 30)",
                 s.rel_perp, s.rel_par, s.n, el);
    return s.rel_perp < 1e-3 && s.rel_par < 1e-3 && el < 30.0;
}

bool crit2(std::string& detail) {
    return slope_check(fix::tg_field(), fix::tg_manifold(), ManifoldKind::stable, -1.0,
                       working_t_grid(ManifoldKind::stable, -1.0), detail);
}

bool crit3(std::string& detail) {
    return domination_check(fix::tg_field(), fix::tg_manifold(), ManifoldKind::stable, -1.0,
                            working_t_grid(ManifoldKind::stable, -1.0), detail);
}

bool crit4(std::string& detail) {
    const auto& field = fix::tg_field();
    const auto& man = fix::tg_manifold();
    const double t0 = -0.9;
    const double y_top = 0.9 * tg::ymax(kPrm, -1.0, -1.0, t0);
    const double tol = 2.0 * 2.0 / 512; // two grid cells in x

    const ScalarFieldGrid g05 = controlled_ftle(field, man, ManifoldKind::stable, -1.0, 0.05, t0);
    const RidgeStat s05 = ridge_deviation(g05, ManifoldKind::stable, 0.05, -1.0, t0, 0.05, y_top);
    REQUIRE(s05.rows >= 100, "ridge match: too few rows in the comparison band");

    const ScalarFieldGrid g20 = controlled_ftle(field, man, ManifoldKind::stable, -1.0, 0.2, t0);
    const RidgeStat s20 = ridge_deviation(g20, ManifoldKind::stable, 0.2, -1.0, t0, 0.05, y_top);

    const bool match05 = s05.invalid == 0 && s05.max_dev < tol;
    const bool degraded20 = s20.invalid > 0 || s20.max_dev > tol;
    detail = fmt("512x256 ridge at t=-0.9 vs target slice over %d rows: eps=0.05 max dev %.2e "
                 "(need < %.2e), eps=0.2 max dev %.2e%s (must exceed the tolerance)",
                 s05.rows, s05.max_dev, tol, s20.max_dev,
                 s20.invalid > 0 ? " with ridge gaps" : "");
    return match05 && degraded20;
}

bool crit5(std::string& detail) {
    const auto& field = fix::tg_field();
    const auto& man = fix::tg_manifold();
    const double eps = 0.1, T = -1.0;
    const double tol = 2.0 * 2.0 / 512; // same ridge standard as the t=-0.9 check

    DesiredManifold des = tg::make_desired(kPrm, ManifoldKind::stable, eps, T);
    const std::vector<double> p_grid = linspace(man.p_min, man.p_max, 61);

    struct Sweep {
        double t = 0.0;
        bool match = false;
        bool window_empty = true;
        double p_hi = -std::numeric_limits<double>::infinity();
        double y_top = 0.0;
        double max_dev = 0.0;
        int rows = 0;
    };
    std::vector<Sweep> sw;
    for (double tq : {0.2, 0.5, 1.5}) {
        Sweep s;
        s.t = tq;
        try {
            const MappabilityWindow w = mappability_window(man, des, tq, p_grid);
            s.window_empty = w.empty();
            if (!w.empty()) s.p_hi = w.p_hi;
        } catch (const validation_error&) {
            // no covered parameter run left at this time
        }
        // rows with a guaranteed slice point, as in the t=-0.9 check; the cap
        // y_m(t) = y(t - T + p_min) sinks toward the wall as t grows
        s.y_top = 0.9 * tg::ymax(kPrm, T, man.p_min, tq);
        if (s.y_top > 0.05) {
            const ScalarFieldGrid g =
                controlled_ftle(field, man, ManifoldKind::stable, T, eps, tq);
            const RidgeStat st =
                ridge_deviation(g, ManifoldKind::stable, eps, T, tq, 0.05, s.y_top);
            s.rows = st.rows;
            s.max_dev = st.max_dev;
            s.match = st.rows > 0 && st.invalid == 0 && st.max_dev < tol;
        } // else: no guaranteed row remains above the comparison floor -> no match
        sw.push_back(s);
    }

    double last_pass = -std::numeric_limits<double>::infinity();
    for (const auto& s : sw)
        if (s.match) last_pass = s.t;
    const bool ok = sw[0].match && sw[1].match && !sw[2].match && last_pass >= 0.0 &&
                    last_pass <= 0.6 && sw[0].p_hi > sw[1].p_hi && sw[2].window_empty;
    if (!ok) {
        std::cout
            << "note: the commanded offset eps*exp(t - T - A(y)) doubles every ~0.7 time\n"
               "note: units and crosses the base-flow advection scale in the upper channel\n"
               "note: near t = 0.2 at eps = 0.1: the measured ridge sits "
            << fmt("%.1e", sw[0].max_dev)
            << " right of the\n"
               "note: commanded curve already at the guaranteed rows of t = 0.2, and the\n"
               "note: guarantee cap y_m(t) sinks below the y = 0.05 row floor before t = 0.5\n"
            << fmt("note: (y_m caps: %.4f, %.4f, %.1e), so no later sweep time has a\n",
                   sw[0].y_top / 0.9, sw[1].y_top / 0.9, sw[2].y_top / 0.9)
            << "note: verifiable match; the run shows the degradation gradient (sub-cell\n"
               "note: tracking at eps <= 0.05 for the same sweep times, rising to 0.04 ->\n"
               "note: 0.14 -> off-band wander at eps = 0.1) rather than a pass/pass/fail\n"
               "note: split.\n";
    }
    detail = fmt("eps=0.1 ridge sweep over guaranteed rows (tol %.2e): t=0.2 dev %.2e over %d "
                 "rows, t=0.5/1.5 no rows above the y=0.05 floor (need pass/pass/fail); last "
                 "pass t=%.1f not in [0.0, 0.6]; window p_hi %+.3f -> %+.3f -> none",
                 tol, sw[0].max_dev, sw[0].rows, last_pass, sw[0].p_hi, sw[1].p_hi);
    return ok;
}

bool crit6(std::string& detail) {
    const auto& man = fix::tg_manifold();
    const double kCf = kPi + kPi * kPi + std::numbers::sqrt2 * kPi * kPi * kPi;
    const ErrorBounds eb(man, kCf);

    // unit constants make the prefactor 1.5 and pin the limit in closed form
    BoundConstants bc;
    bc.sup_f = 1.0;
    bc.C_g = 1.0;
    bc.C_m = 1.0;
    bc.eps = 0.1;

    // (a) transverse estimate at growing t settles onto the near-saddle value
    const double limit = eb.perp_limit_near_saddle(bc);
    const double frozen = 0.00151981775463506657; // 1.5 * 0.01 / pi^2
    REQUIRE(std::abs(limit - frozen) <= 1e-9 * frozen,
            "transverse limit deviates from its frozen value");
    std::vector<double> devs;
    for (double sig : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        const double v = eb.perp(bc, 0.0, -1.0 + sig); // curve argument = sig
        devs.push_back(std::abs(v - limit) / limit);
    }
    const bool a_ok = devs[0] > 0.01 && devs[1] < 0.01 && devs[2] < 0.01 && devs[3] < 0.01 &&
                      devs[4] < 0.01 && devs[4] <= devs[1];

    // (b) tangential estimate at growing t must decay below 1e-3 of its peak
    const double p0 = -0.5; // seeding parameter, sigma_0 = 0.5
    double peak = 0.0;
    for (double tq = 0.0; tq <= 6.0; tq += 0.01) peak = std::max(peak, eb.par(bc, p0, tq));
    REQUIRE(peak > 0.0, "tangential estimate: degenerate peak");
    const double tail = eb.par(bc, p0, 24.0);
    const double ratio = tail / peak;
    const bool b_ok = ratio < 1e-3;
    if (!b_ok) {
        std::cout << "note: the tangential estimate saturates instead of decaying: tail/peak = "
                  << fmt("%.3f", ratio) << " at t = 24 (tolerance 1e-3).\n"
                  << "note: its cumulative factor grows like exp(lam*s) while the speed weight\n"
                  << "note: decays like exp(-lam*s); the product approaches a positive constant,\n"
                  << "note: so the tail cannot drop below that constant's share of the peak.\n";
    }
    detail = fmt("(a) transverse estimate settles to %.6e (frozen value), deviations at "
                 "sigma {0, 0.5, 1, 2, 4} = {%.0e, %.0e, %.0e, %.0e, %.0e}, need < 1%% from "
                 "sigma 0.5 on; (b) tangential tail/peak %.3f, need < 1e-3",
                 limit, devs[0], devs[1], devs[2], devs[3], devs[4], ratio);
    return a_ok && b_ok;
}

bool crit7(std::string& detail) {
    const auto& field = fix::tg_field();

    // rotation/trace identity on random matrices
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const Mat2 A{u(rng), u(rng), u(rng), u(rng)};
        const Vec2 b{u(rng), u(rng)};
        const Vec2 lhs = A.transposed() * rotate90(b) + rotate90(A * b);
        const Vec2 rhs = rotate90(b) * A.trace();
        worst = std::max({worst, std::abs(lhs.x - rhs.x), std::abs(lhs.y - rhs.y)});
    }
    const bool id_ok = worst <= 1e-12;

    // steady flow: the stretching ridge sits on the cell boundary x = 1
    const Rhs steady = [&field](Vec2 x, double) { return field.eval(x); };
    const IntegratorConfig icfg{StepMethod::rk4_fixed, 1e-9, 1e-9, 1.0 / 128.0, 0.0, 2000000};
    const ScalarFieldGrid g =
        compute_ftle(steady, field.domain, 256, 128, -0.9, 1.0, icfg, field.domain);
    const auto ridge = extract_ridge(g, 0.5, 1.5);
    double rdev = 0.0;
    int rows = 0, invalid = 0;
    for (const auto& rp : ridge) {
        if (rp.y <= 0.05 || rp.y >= 0.95) continue;
        ++rows;
        if (!rp.valid) {
            ++invalid;
            continue;
        }
        rdev = std::max(rdev, std::abs(rp.x - 1.0));
    }
    REQUIRE(rows >= 50, "steady ridge: too few rows");
    const bool ridge_ok = invalid == 0 && rdev <= g.dx();

    // the flow map of the incompressible field preserves area
    const int nb = 800;
    std::vector<Vec2> poly;
    poly.reserve(nb);
    for (int k = 0; k < nb; ++k) {
        const double s = 4.0 * k / nb; // perimeter coordinate, one unit per edge
        Vec2 q;
        if (s < 1.0)
            q = {0.3 + 0.4 * s, 0.3};
        else if (s < 2.0)
            q = {0.7, 0.3 + 0.4 * (s - 1.0)};
        else if (s < 3.0)
            q = {0.7 - 0.4 * (s - 2.0), 0.7};
        else
            q = {0.3, 0.7 - 0.4 * (s - 3.0)};
        poly.push_back(q);
    }
    auto shoelace = [](const std::vector<Vec2>& q) {
        double a2 = 0.0;
        for (size_t i = 0; i < q.size(); ++i) {
            const Vec2& u0 = q[i];
            const Vec2& u1 = q[(i + 1) % q.size()];
            a2 += u0.x * u1.y - u1.x * u0.y;
        }
        return 0.5 * std::abs(a2);
    };
    const IntegratorConfig acfg{StepMethod::rk45_adaptive, 1e-10, 1e-10, 1e-2, 0.0, 2000000};
    const FlowMapResult fm = flow_map(steady, poly, 0.0, 1.0, acfg, field.domain);
    for (uint8_t e : fm.escaped) REQUIRE(e == 0, "area check: unexpected domain escape");
    const double ratio = shoelace(fm.end) / shoelace(poly);
    const bool area_ok = std::abs(ratio - 1.0) <= 0.01;

    // seeding-slice congruence of the reference target
    const auto& man = fix::tg_manifold();
    DesiredManifold des = tg::make_desired(kPrm, ManifoldKind::stable, 0.1, -1.0);
    const ValidationReport rep = validate_desired(
        field, man, des, linspace(man.p_min, man.p_max, 41), {-1.0, -0.5, 0.0}, {});
    const bool cong_ok = rep.congruent && rep.congruence_max <= rep.congruence_tol;

    // fourth-order endpoint convergence of the fixed-step integrator on the
    // closed-form channel trajectory
    double err[3];
    int k = 0;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        const IntegratorConfig c{StepMethod::rk4_fixed, 1e-9, 1e-9, h, 0.0, 2000000};
        const Trajectory tr = integrate_ode(steady, {1.0, 0.5}, 0.0, 0.5, c);
        err[k++] = std::abs(tr.x.back().y - tg::y_het(kPrm, 0.5));
    }
    const double p1 = std::log2(err[0] / err[1]);
    const double p2 = std::log2(err[1] / err[2]);
    const bool rk_ok = p1 > 3.6 && p1 < 4.4 && p2 > 3.6 && p2 < 4.4;

    detail = fmt("trace identity sup %.1e (1e4 draws, tol 1e-12); steady ridge |x-1| %.2e "
                 "(cell %.2e); area drift %.2e (tol 1e-2); congruence %.2e <= %.2e; "
                 "step-halving orders %.2f, %.2f (need ~4)",
                 worst, rdev, g.dx(), ratio - 1.0, rep.congruence_max, rep.congruence_tol, p1,
                 p2);
    return id_ok && ridge_ok && area_ok && cong_ok && rk_ok;
}

bool crit8(std::string& detail) {
    const auto& field = fix::tg_field();
    const auto& man = fix::tg_manifold_unstable();
    const double T = 1.0;
    const OracleStats s = oracle_compare(field, man, ManifoldKind::unstable, T, 0.0, 1.0);
    const bool ok1 = s.rel_perp < 1e-3 && s.rel_par < 1e-3;
    std::string d2, d3;
    const bool ok2 = slope_check(field, man, ManifoldKind::unstable, T,
                                 working_t_grid(ManifoldKind::unstable, T), d2);
    const bool ok3 = domination_check(field, man, ManifoldKind::unstable, T,
                                      working_t_grid(ManifoldKind::unstable, T), d3);
    detail = fmt("unstable mirror -- oracle rel sup %.2e / tangential %.2e (tol 1e-3); "
                 "scaling: %s; domination: %s",
                 s.rel_perp, s.rel_par, d2.c_str(), d3.c_str());
    return ok1 && ok2 && ok3;
}

bool run_criterion(int c, std::string& detail) {
    switch (c) {
    case 1: return crit1(detail);
    case 2: return crit2(detail);
    case 3: return crit3(detail);
    case 4: return crit4(detail);
    case 5: return crit5(detail);
    case 6: return crit6(detail);
    case 7: return crit7(detail);
    case 8: return crit8(detail);
    }
    REQUIRE(false, "unknown criterion number");
    return false;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<int> todo;
    if (argc > 1) {
        const int c = std::atoi(argv[1]);
        if (c < 1 || c > 8) {
            std::cerr << "usage: acceptance [1..8]\n";
            return 2;
        }
        todo.push_back(c);
    } else {
        for (int c = 1; c <= 8; ++c) todo.push_back(c);
    }

    bool all_ok = true;
    for (int c : todo) {
        std::string detail;
        bool ok = false;
        try {
            ok = run_criterion(c, detail);
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("unexpected exception: ") + e.what();
        }
        std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c << ": " << detail << "\n";
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}
