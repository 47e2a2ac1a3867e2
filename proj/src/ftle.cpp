#include "flowctl/ftle.hpp"

#include <algorithm>
#include <cmath>

#include "flowctl/errors.hpp"

namespace flowctl {

ScalarFieldGrid compute_ftle(const Rhs& rhs, Rect bounds, int nx, int ny, double t0, double tau,
                             const IntegratorConfig& cfg, const Rect& domain, int threads) {
    if (nx < 3 || ny < 3) throw config_error("ftle grid needs at least 3x3 cells");
    if (tau == 0.0) throw config_error("ftle needs a nonzero horizon");

    ScalarFieldGrid g;
    g.bounds = bounds;
    g.nx = nx;
    g.ny = ny;
    g.v.assign(static_cast<size_t>(nx) * ny, 0.0);
    g.mask.assign(static_cast<size_t>(nx) * ny, 0);

    std::vector<Vec2> seeds(static_cast<size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) seeds[static_cast<size_t>(j) * nx + i] = {g.x_at(i), g.y_at(j)};

    const FlowMapResult fm = flow_map(rhs, seeds, t0, tau, cfg, domain, threads);

    auto end_at = [&](int i, int j) { return fm.end[static_cast<size_t>(j) * nx + i]; };
    auto esc_at = [&](int i, int j) { return fm.escaped[static_cast<size_t>(j) * nx + i] != 0; };

    const double dx = g.dx(), dy = g.dy();
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            // central differences, one-sided at the rim
            const int il = std::max(i - 1, 0), ir = std::min(i + 1, nx - 1);
            const int jl = std::max(j - 1, 0), jr = std::min(j + 1, ny - 1);
            const Vec2 dX = (end_at(ir, j) - end_at(il, j)) / ((ir - il) * dx);
            const Vec2 dY = (end_at(i, jr) - end_at(i, jl)) / ((jr - jl) * dy);
            const Mat2 F{dX.x, dY.x, dX.y, dY.y};
            const double s = spectral_norm(F);
            g.at(i, j) = std::log(std::max(s, 1e-300)) / std::abs(tau);
            if (esc_at(i, j) || esc_at(il, j) || esc_at(ir, j) || esc_at(i, jl) ||
                esc_at(i, jr)) {
                g.mask[static_cast<size_t>(j) * nx + i] = 1;
            }
        }
    }
    return g;
}

std::vector<RidgePoint> extract_ridge(const ScalarFieldGrid& grid, double x_lo, double x_hi) {
    std::vector<RidgePoint> out;
    out.reserve(grid.ny);
    for (int j = 0; j < grid.ny; ++j) {
        RidgePoint rp;
        rp.j = j;
        rp.y = grid.y_at(j);
        int best = -1;
        double vbest = 0.0;
        for (int i = 0; i < grid.nx; ++i) {
            const double x = grid.x_at(i);
            if (x < x_lo || x > x_hi || grid.masked(i, j)) continue;
            if (best < 0 || grid.at(i, j) > vbest) {
                best = i;
                vbest = grid.at(i, j);
            }
        }
        if (best >= 0) {
            rp.valid = true;
            rp.i = best;
            rp.x = grid.x_at(best);
            if (best > 0 && best + 1 < grid.nx && !grid.masked(best - 1, j) &&
                !grid.masked(best + 1, j)) {
                const double vl = grid.at(best - 1, j), vc = vbest, vr = grid.at(best + 1, j);
                const double den = vl - 2.0 * vc + vr;
                if (den < 0.0) { // genuine local max: refine on the parabola
                    const double delta = 0.5 * (vl - vr) / den;
                    if (std::abs(delta) <= 1.0) rp.x += delta * grid.dx();
                }
            }
        }
        out.push_back(rp);
    }
    return out;
}

std::vector<ManifoldErrorRecord> measure_manifold_error(const Rhs& controlled,
                                                        const UnperturbedManifold& man,
                                                        const DesiredManifold& des,
                                                        const std::vector<double>& p_grid,
                                                        const std::vector<double>& t_grid,
                                                        const Rect& domain,
                                                        const MeasureOptions& opt) {
    std::vector<double> ts = t_grid;
    std::sort(ts.begin(), ts.end());

    std::vector<ManifoldErrorRecord> out;
    out.reserve(p_grid.size() * ts.size());

    for (double p : p_grid) {
        const Vec2 seed = des.value(p, 0.0);

        // march the controlled trajectory through the sorted times, both ways from 0
        std::vector<Vec2> pos(ts.size());
        std::vector<uint8_t> esc(ts.size(), 0);
        auto sweep = [&](bool forward) {
            Vec2 x = seed;
            double tcur = 0.0;
            bool dead = false;
            if (forward) {
                for (size_t k = 0; k < ts.size(); ++k) {
                    if (ts[k] < 0.0) continue;
                    if (!dead) {
                        const PointResult r =
                            advance_point(controlled, x, tcur, ts[k], opt.integ, &domain);
                        x = r.x;
                        tcur = r.escaped ? r.t_end : ts[k];
                        dead = r.escaped;
                    }
                    pos[k] = x;
                    esc[k] = dead ? 1 : 0;
                }
            } else {
                for (size_t k = ts.size(); k-- > 0;) {
                    if (ts[k] >= 0.0) continue;
                    if (!dead) {
                        const PointResult r =
                            advance_point(controlled, x, tcur, ts[k], opt.integ, &domain);
                        x = r.x;
                        tcur = r.escaped ? r.t_end : ts[k];
                        dead = r.escaped;
                    }
                    pos[k] = x;
                    esc[k] = dead ? 1 : 0;
                }
            }
        };
        sweep(true);
        sweep(false);

        const double a0 = man.arg(p, 0.0);
        for (size_t k = 0; k < ts.size(); ++k) {
            ManifoldErrorRecord rec;
            rec.p = p;
            rec.t = ts[k];
            rec.escaped = esc[k] != 0;
            rec.e = pos[k] - des.value(p, ts[k]);
            const double a = man.arg(p, ts[k]);
            if (man.covers(a)) {
                const Vec2 f = man.vel(a);
                const double fn = norm(f);
                if (fn > man.eta) {
                    rec.e_perp = dot(rotate90(f), rec.e) / fn;
                    rec.e_par = dot(f, rec.e) / fn;
                    const double gain =
                        man.covers(a0) ? man.speed(a0) / fn : man.speed_ext(a0) / fn;
                    rec.reliable = !rec.escaped && gain <= opt.gain_cap;
                }
            }
            out.push_back(rec);
        }
    }
    return out;
}

} // namespace flowctl
