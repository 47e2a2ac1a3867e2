#include "flowctl/pipeline.hpp"

#include <cmath>

#include "flowctl/errors.hpp"
#include "flowctl/expression.hpp"

namespace flowctl {

IntegratorConfig integrator_from_config(const Config& cfg, const std::string& section) {
    IntegratorConfig ic;
    const std::string method = cfg.get_string(section + ".method", "rk45-adaptive");
    if (method == "rk45-adaptive") {
        ic.method = StepMethod::rk45_adaptive;
    } else if (method == "rk4-fixed") {
        ic.method = StepMethod::rk4_fixed;
    } else {
        throw config_error(section + ".method: expected rk45-adaptive or rk4-fixed, got " +
                           method);
    }
    ic.abs_tol = cfg.get_double(section + ".abs_tol", 1e-9);
    ic.rel_tol = cfg.get_double(section + ".rel_tol", 1e-9);
    ic.dt = cfg.get_double(section + ".dt", 1e-2);
    ic.max_steps = cfg.get_int(section + ".max_steps", 2000000);
    return ic;
}

RunSetup build_run(const Config& cfg) {
    RunSetup run;

    // field
    const std::string ftype = cfg.get_string("field.type");
    Rect domain{0.0, 2.0, 0.0, 1.0};
    if (ftype == "taylor_green") {
        run.prm.U = cfg.get_double("field.U", 1.0);
        run.prm.L = cfg.get_double("field.L", 1.0);
        domain = {0.0, 2.0 * run.prm.L, 0.0, run.prm.L};
    }
    if (cfg.has("field.domain")) {
        const auto d = cfg.get_list("field.domain");
        if (d.size() != 4 || !(d[1] > d[0]) || !(d[3] > d[2])) {
            throw config_error("field.domain: expected x_min x_max y_min y_max");
        }
        domain = {d[0], d[1], d[2], d[3]};
    }
    if (ftype == "taylor_green") {
        run.is_taylor_green = true;
        run.field = std::make_shared<VectorField2D>(taylor_green_field(run.prm, domain));
    } else if (ftype == "expression") {
        run.field = std::make_shared<VectorField2D>(
            expression_field(cfg.get_string("field.fx"), cfg.get_string("field.fy"), domain));
    } else {
        throw config_error("field.type: expected taylor_green or expression, got " + ftype);
    }

    // saddle
    const auto guess = cfg.get_list("saddle.guess");
    if (guess.size() != 2) throw config_error("saddle.guess: expected two coordinates");
    SaddleSearchOptions sopt;
    sopt.max_iter = cfg.get_int("saddle.max_iter", 50);
    sopt.tol_fixedpoint = cfg.get_double("saddle.tol_fixedpoint", 1e-12);
    sopt.tol_eig = cfg.get_double("saddle.tol_eig", 1e-8);
    run.saddle = find_saddle(*run.field, {guess[0], guess[1]}, sopt);

    // manifold
    const std::string kind = cfg.get_string("manifold.kind", "stable");
    if (kind == "stable") {
        run.kind = ManifoldKind::stable;
    } else if (kind == "unstable") {
        run.kind = ManifoldKind::unstable;
    } else {
        throw config_error("manifold.kind: expected stable or unstable, got " + kind);
    }
    run.time_anchor = cfg.get_double("manifold.time_anchor");
    run.p_end = cfg.get_double("manifold.endpoint");
    ManifoldOptions mopt;
    mopt.anchor_arclength = cfg.get_double("manifold.anchor_arclength", -1.0);
    mopt.branch = cfg.get_int("manifold.branch", 1);
    mopt.delta_frac = cfg.get_double("manifold.delta_frac", 1e-6);
    mopt.eta_frac = cfg.get_double("manifold.eta_frac", 1e-8);
    run.man = std::make_shared<UnperturbedManifold>(
        compute_manifold(*run.field, run.saddle, run.kind, run.p_end, run.time_anchor, mopt));

    // desired manifold
    run.eps = cfg.get_double("desired.eps");
    const std::string form = cfg.get_string("desired.form", "taylor_green");
    bool analytic_available = false;
    if (form == "taylor_green") {
        if (!run.is_taylor_green) {
            throw config_error("desired.form taylor_green requires field.type taylor_green");
        }
        run.des = tg::make_desired(run.prm, run.kind, run.eps, run.time_anchor);
        analytic_available = true;
    } else if (form == "expression") {
        auto ex = std::make_shared<Expression>(
            Expression::parse(cfg.get_string("desired.target_x"), {"p", "t"}));
        auto ey = std::make_shared<Expression>(
            Expression::parse(cfg.get_string("desired.target_y"), {"p", "t"}));
        run.des.eps = run.eps;
        run.des.target = [ex, ey](double p, double t) -> Vec2 {
            const double args[2] = {p, t};
            return {ex->eval(args), ey->eval(args)};
        };
    } else {
        throw config_error("desired.form: expected taylor_green or expression, got " + form);
    }

    // control synthesis
    SynthesisOptions copt;
    copt.h_t = cfg.get_double("control.h_t", -1.0);
    copt.tube_radius = cfg.get_double("control.tube_radius", -1.0);
    copt.tol_ext = cfg.get_double("control.tol_ext", 1e-8);
    copt.search_samples = cfg.get_int("control.search_samples", 400);
    if (cfg.get_bool("control.analytic", false)) {
        if (!analytic_available) {
            throw config_error("control.analytic requires the taylor_green desired form");
        }
        copt.analytic_override = tg::make_control(run.prm, run.kind, run.time_anchor);
    }
    run.ctl = synthesize_control(*run.field, *run.man, run.des, copt);

    // evaluation grids: p spans the covered window, widest at the anchor time
    const int np = cfg.get_int("grids.np", 61);
    const int nt = cfg.get_int("grids.nt", 21);
    const double t_lo = cfg.get_double("grids.t_lo", run.time_anchor);
    const double t_hi = cfg.get_double("grids.t_hi", run.time_anchor + 1.0);
    run.p_grid = run.kind == ManifoldKind::stable
                     ? linspace(run.p_end, run.man->p_cap, np)
                     : linspace(run.man->p_cap, run.p_end, np);
    run.t_grid = linspace(t_lo, t_hi, nt);
    return run;
}

bool target_slice_x(const RunSetup& run, double t, double y, double& x_out) {
    if (run.is_taylor_green) {
        const double floor = 1e-9 * run.prm.L;
        if (y <= floor || y >= run.prm.L - floor) return false;
        x_out = tg::slice_x(run.prm, run.kind, run.eps, run.time_anchor, y, t);
        return true;
    }
    // generic: bisect target_y(p, t) = y over the covered parameter range
    const double shift = t - run.time_anchor;
    double lo = run.man->p_min - shift;
    double hi = run.man->p_max - shift;
    double flo = run.des.value(lo, t).y - y;
    double fhi = run.des.value(hi, t).y - y;
    if (flo == 0.0) {
        x_out = run.des.value(lo, t).x;
        return true;
    }
    if (fhi == 0.0) {
        x_out = run.des.value(hi, t).x;
        return true;
    }
    if (flo * fhi > 0.0) return false;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = run.des.value(mid, t).y - y;
        if (fm == 0.0) {
            lo = hi = mid;
            break;
        }
        if (fm * flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    x_out = run.des.value(0.5 * (lo + hi), t).x;
    return true;
}

} // namespace flowctl
