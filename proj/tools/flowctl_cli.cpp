// flowctl: synthesize the control velocity that pins a stable/unstable
// manifold segment of a 2D steady flow onto a prescribed moving curve, then
// evaluate error estimates and verify by direct integration + FTLE ridges.
//
// Subcommands:
//   validate  build the manifold, check the target curve against it
//   control   synthesize the control, tabulate it and the error estimates
//   verify    integrate controlled trajectories, measure deviation, FTLE ridges
//   all       everything above
//
// Exit codes: 0 ok, 2 configuration problem, 3 validation failure,
// 4 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowctl/errors.hpp"
#include "flowctl/pipeline.hpp"

using nlohmann::json;
using namespace flowctl;

namespace {

struct CliArgs {
    std::string config_path;
    std::string preset;
    std::vector<double> eps;
    std::vector<double> times;
    std::string grid;
    std::string out = "out";
    int threads = 0;
    bool do_validate = false, do_control = false, do_verify = false;
};

std::string gfmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string join_g(const std::vector<double>& vs) {
    std::string s;
    for (size_t i = 0; i < vs.size(); ++i) {
        if (i) s += ' ';
        s += fmt17(vs[i]);
    }
    return s;
}

Config assemble_config(const CliArgs& a) {
    Config cfg;
    if (!a.preset.empty()) cfg = make_preset(a.preset);
    if (!a.config_path.empty()) cfg.load_file(a.config_path);
    if (!a.eps.empty()) cfg.set("desired.eps", fmt17(a.eps.front()));
    if (!a.times.empty()) cfg.set("ftle.times", join_g(a.times));
    if (!a.grid.empty()) {
        const auto x = a.grid.find('x');
        int nx = 0, ny = 0;
        if (x != std::string::npos) {
            try {
                nx = std::stoi(a.grid.substr(0, x));
                ny = std::stoi(a.grid.substr(x + 1));
            } catch (const std::exception&) {
            }
        }
        if (nx <= 0 || ny <= 0) throw config_error("--grid: expected NXxNY, got " + a.grid);
        cfg.set("ftle.nx", std::to_string(nx));
        cfg.set("ftle.ny", std::to_string(ny));
    }
    return cfg;
}

// Read every key the verify stage understands, so a config file written for
// `all` passes the leftover-key check under the narrower subcommands too.
struct VerifyParams {
    IntegratorConfig measure;
    double gain_cap;
    std::vector<double> times;
    double tau;
    int nx, ny, steps;
    std::vector<double> band;
    double quad_tol;
    int n0, doublings;
    double conv_tol;
};

VerifyParams resolve_verify_params(const Config& cfg) {
    VerifyParams vp;
    vp.measure = integrator_from_config(cfg, "measure");
    vp.gain_cap = cfg.get_double("measure.gain_cap", 10.0);
    vp.times = cfg.get_list("ftle.times", {});
    vp.tau = cfg.get_double("ftle.tau", 1.0);
    vp.nx = cfg.get_int("ftle.nx", 512);
    vp.ny = cfg.get_int("ftle.ny", 256);
    vp.steps = cfg.get_int("ftle.steps", 256);
    vp.band = cfg.get_list("ftle.band", {});
    vp.quad_tol = cfg.get_double("bounds.quad_tol", 1e-9);
    vp.n0 = cfg.get_int("bounds.n0", 64);
    vp.doublings = cfg.get_int("bounds.doublings", 2);
    vp.conv_tol = cfg.get_double("bounds.conv_tol", 0.05);
    return vp;
}

void write_manifold_nodes(const std::string& path, const UnperturbedManifold& man) {
    std::ostringstream os;
    os << "p,x,y,speed\n";
    for (size_t i = 0; i < man.curve.size(); ++i) {
        os << fmt17(man.curve.t[i]) << ',' << fmt17(man.curve.x[i].x) << ','
           << fmt17(man.curve.x[i].y) << ',' << fmt17(norm(man.curve.v[i])) << '\n';
    }
    write_text_file(path, os.str());
}

json window_json(const MappabilityWindow& w) {
    return json{{"t", w.t},
                {"p_lo", w.p_lo},
                {"p_hi", w.p_hi},
                {"monotone", w.monotone},
                {"empty", w.empty()},
                {"points", w.p.size()}};
}

bool run_validate(const RunSetup& run, const std::string& out, const std::string& sfx,
                  json& report) {
    const ValidationReport rep =
        validate_desired(*run.field, *run.man, run.des, run.p_grid, run.t_grid);

    json v;
    v["eps"] = run.eps;
    v["C_closeness"] = rep.C_closeness;
    v["K_smoothness"] = rep.K_smoothness;
    v["congruence_max"] = rep.congruence_max;
    v["congruence_tol"] = rep.congruence_tol;
    v["congruent"] = rep.congruent;
    v["limit_ok"] = rep.limit_ok;
    v["ok"] = rep.ok();
    v["windows"] = json::array();
    for (const auto& w : rep.windows) v["windows"].push_back(window_json(w));
    v["failures"] = json::array();
    for (const auto& f : rep.failures) {
        v["failures"].push_back(
            json{{"what", f.what}, {"p", f.p}, {"t", f.t}, {"value", f.value}, {"tol", f.tol}});
    }
    report["validate"].push_back(v);

    std::ostringstream os;
    os << "t,p_lo,p_hi,monotone,points\n";
    for (const auto& w : rep.windows) {
        os << fmt17(w.t) << ',' << fmt17(w.p_lo) << ',' << fmt17(w.p_hi) << ','
           << (w.monotone ? 1 : 0) << ',' << w.p.size() << '\n';
    }
    write_text_file(out + "/windows" + sfx + ".csv", os.str());
    return rep.ok();
}

// sup of the eps-normalized distance (value and slope) between target and
// manifold over the evaluation grid, restricted to covered arguments
double closeness_sup(const RunSetup& run) {
    double sup = 0.0;
    for (double t : run.t_grid) {
        for (double p : run.p_grid) {
            const double a = run.man->arg(p, t);
            if (!run.man->covers(a)) continue;
            const Vec2 y = run.man->pos(a);
            const Vec2 fy = run.man->vel(a);
            const double c =
                (norm(run.des.value(p, t) - y) + norm(run.des.dp(p, t) - fy)) / run.eps;
            if (c > sup) sup = c;
        }
    }
    return sup;
}

void run_control(const RunSetup& run, const VerifyParams& vp, const std::string& out,
                 const std::string& sfx, json& report) {
    {
        std::ostringstream os;
        write_control_csv(os, run.ctl, run.p_grid, run.t_grid);
        write_text_file(out + "/control_table" + sfx + ".csv", os.str());
    }

    ConstantsOptions copt;
    copt.n0 = vp.n0;
    copt.doublings = vp.doublings;
    copt.conv_tol = vp.conv_tol;
    copt.t_samples = {run.t_grid.front(), 0.5 * (run.t_grid.front() + run.t_grid.back()),
                      run.t_grid.back()};
    BoundConstants bc = estimate_constants(*run.field, &run.ctl, copt);
    bc.C_m = closeness_sup(run);
    bc.eps = run.eps;

    const ErrorBounds eb(*run.man, bc.C_f(), vp.quad_tol);

    json c;
    c["eps"] = run.eps;
    c["sup_f"] = bc.sup_f;
    c["sup_Df"] = bc.sup_Df;
    c["sup_D2f"] = bc.sup_D2f;
    c["C_g"] = bc.C_g;
    c["C_m"] = bc.C_m;
    c["C_f"] = bc.C_f();
    c["prefactor"] = bc.prefactor();
    c["converged"] = bc.converged;
    c["sigma_min"] = eb.sigma_min();
    c["sigma_max"] = eb.sigma_max();
    c["perp_limit_near_saddle"] = eb.perp_limit_near_saddle(bc);
    report["control"].push_back(c);

    std::ostringstream os;
    os << "p,t,arg,perp_bound,par_bound\n";
    for (double t : run.t_grid) {
        for (double p : run.p_grid) {
            double perp = std::nan(""), par = std::nan("");
            try {
                perp = eb.perp(bc, p, t);
                par = eb.par(bc, p, t);
            } catch (const numerical_error&) {
                // argument left the tabulated range on the far side
            }
            os << fmt17(p) << ',' << fmt17(t) << ',' << fmt17(run.man->arg(p, t)) << ','
               << fmt17(perp) << ',' << fmt17(par) << '\n';
        }
    }
    write_text_file(out + "/bounds" + sfx + ".csv", os.str());
}

void run_verify(const RunSetup& run, const VerifyParams& vp, int threads, const std::string& out,
                const std::string& sfx, json& report) {
    MeasureOptions mopt;
    mopt.integ = vp.measure;
    mopt.gain_cap = vp.gain_cap;
    const Rhs controlled = run.ctl.controlled_rhs();
    const auto recs = measure_manifold_error(controlled, *run.man, run.des, run.p_grid,
                                             run.t_grid, run.field->domain, mopt);
    {
        std::ostringstream os;
        write_error_records_csv(os, recs);
        write_text_file(out + "/errors" + sfx + ".csv", os.str());
    }

    double sup_e = 0.0;
    size_t n_reliable = 0, n_escaped = 0;
    for (const auto& r : recs) {
        if (r.escaped) ++n_escaped;
        if (!r.reliable) continue;
        ++n_reliable;
        if (norm(r.e) > sup_e) sup_e = norm(r.e);
    }
    json v;
    v["eps"] = run.eps;
    v["samples"] = recs.size();
    v["reliable"] = n_reliable;
    v["escaped"] = n_escaped;
    v["sup_error_reliable"] = sup_e;
    report["verify"].push_back(v);

    if (vp.times.empty()) return;
    double band_lo = run.field->domain.x_min, band_hi = run.field->domain.x_max;
    if (vp.band.size() == 2) {
        band_lo = vp.band[0];
        band_hi = vp.band[1];
    }
    IntegratorConfig fcfg;
    fcfg.method = StepMethod::rk4_fixed;
    fcfg.dt = vp.tau / vp.steps;

    // The preset's controlled field is evaluable on the whole plane (periodic
    // base, ripple clamped at the strip edges), so FTLE stencil trajectories
    // that the control pushes across a cell wall keep integrating instead of
    // being escape-masked; masking them would drop exactly the stencils that
    // straddle the manifold near the saddle corner. Generic expression fields
    // only promise evaluability on their stated domain, so they keep it as the
    // escape region.
    const Rect esc_domain =
        run.is_taylor_green ? Rect{-1e300, 1e300, -1e300, 1e300} : run.field->domain;

    for (double t0 : vp.times) {
        const ScalarFieldGrid grid = compute_ftle(controlled, run.field->domain, vp.nx, vp.ny, t0,
                                                  vp.tau, fcfg, esc_domain, threads);
        const std::string tag = sfx + "_t" + gfmt(t0);
        {
            std::ostringstream os;
            write_grid_csv(os, grid);
            write_text_file(out + "/ftle" + tag + ".csv", os.str());
        }
        {
            std::ostringstream os;
            write_grid_pgm(os, grid);
            write_text_file(out + "/ftle" + tag + ".pgm", os.str());
        }
        const auto ridge = extract_ridge(grid, band_lo, band_hi);
        {
            std::ostringstream os;
            write_ridge_csv(os, ridge);
            write_text_file(out + "/ridge" + tag + ".csv", os.str());
        }

        // ridge vs. target slice, in cell widths, over rows the target reaches
        double y_top = run.field->domain.y_max;
        if (run.is_taylor_green)
            y_top = tg::ymax(run.prm, run.time_anchor, run.p_end, t0);
        size_t rows = 0, within2 = 0;
        double max_dev = 0.0;
        for (const auto& rp : ridge) {
            if (!rp.valid || rp.y > y_top) continue;
            double xs;
            if (!target_slice_x(run, t0, rp.y, xs)) continue;
            const double dev = std::abs(rp.x - xs) / grid.dx();
            ++rows;
            if (dev < 2.0) ++within2;
            if (dev > max_dev) max_dev = dev;
        }
        json f;
        f["eps"] = run.eps;
        f["t"] = t0;
        f["nx"] = vp.nx;
        f["ny"] = vp.ny;
        f["tau"] = vp.tau;
        f["rows_compared"] = rows;
        f["within_2_cells"] = within2;
        f["max_dev_cells"] = max_dev;
        report["ftle"].push_back(f);
    }
}

int run_cli(const CliArgs& args) {
    std::filesystem::create_directories(args.out);

    Config cfg = assemble_config(args);
    std::vector<double> eps_list = args.eps;
    if (eps_list.empty()) eps_list = {cfg.get_double("desired.eps")};

    json report;
    report["out_dir"] = args.out;
    report["eps"] = eps_list;

    const VerifyParams vp = resolve_verify_params(cfg);

    bool validation_clean = true;
    bool first = true;
    for (double eps : eps_list) {
        cfg.set("desired.eps", fmt17(eps));
        const RunSetup run = build_run(cfg);
        const std::string sfx = eps_list.size() > 1 ? "_eps" + gfmt(eps) : "";
        if (first) {
            write_manifold_nodes(args.out + "/manifold_nodes.csv", *run.man);
            json m;
            m["saddle"] = {run.saddle.a.x, run.saddle.a.y};
            m["lambda_s"] = run.saddle.lambda_s;
            m["lambda_u"] = run.saddle.lambda_u;
            m["kind"] = run.kind == ManifoldKind::stable ? "stable" : "unstable";
            m["p_end"] = run.p_end;
            m["p_cap"] = run.man->p_cap;
            m["p_range"] = {run.man->p_min, run.man->p_max};
            m["time_anchor"] = run.time_anchor;
            report["manifold"] = m;
            first = false;
        }
        if (args.do_validate) validation_clean &= run_validate(run, args.out, sfx, report);
        if (args.do_control) run_control(run, vp, args.out, sfx, report);
        if (args.do_verify) run_verify(run, vp, args.threads, args.out, sfx, report);
    }

    cfg.check_consumed();
    write_text_file(args.out + "/config_echo.ini", cfg.dump());
    write_text_file(args.out + "/run_report.json", report.dump(2) + "\n");
    std::cout << "wrote " << args.out << "/run_report.json\n";

    if (!validation_clean) {
        throw validation_error("target validation failed, see " + args.out + "/run_report.json");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"manifold-pinning control synthesis for 2D steady flows"};
    app.require_subcommand(1);

    CliArgs args;
    app.add_option("--config", args.config_path, "INI configuration file")
        ->check(CLI::ExistingFile);
    app.add_option("--preset", args.preset, "named preset (taylor_green_paper)");
    app.add_option("--eps", args.eps, "perturbation sizes (overrides desired.eps)")
        ->delimiter(',');
    app.add_option("--times", args.times, "FTLE evaluation times (overrides ftle.times)")
        ->delimiter(',');
    app.add_option("--grid", args.grid, "FTLE grid as NXxNY");
    app.add_option("--out", args.out, "output directory")->capture_default_str();
    app.add_option("--threads", args.threads, "worker threads (0 = hardware)");

    auto* sub_validate =
        app.add_subcommand("validate", "build the manifold and check the target curve");
    auto* sub_control =
        app.add_subcommand("control", "synthesize the control and tabulate error estimates");
    auto* sub_verify =
        app.add_subcommand("verify", "measure controlled-trajectory error and FTLE ridges");
    auto* sub_all = app.add_subcommand("all", "validate + control + verify");
    for (auto* s : {sub_validate, sub_control, sub_verify, sub_all}) s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    args.do_validate = sub_validate->parsed() || sub_all->parsed();
    args.do_control = sub_control->parsed() || sub_all->parsed();
    args.do_verify = sub_verify->parsed() || sub_all->parsed();

    try {
        return run_cli(args);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 3;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
