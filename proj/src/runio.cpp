#include "flowctl/runio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "flowctl/errors.hpp"

namespace flowctl {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_grid_csv(std::ostream& os, const ScalarFieldGrid& g) {
    os << fmt17(g.bounds.x_min) << ',' << fmt17(g.bounds.x_max) << ',' << fmt17(g.bounds.y_min)
       << ',' << fmt17(g.bounds.y_max) << ',' << g.nx << ',' << g.ny << '\n';
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (i) os << ',';
            os << (g.masked(i, j) ? "nan" : fmt17(g.at(i, j)));
        }
        os << '\n';
    }
}

void write_grid_pgm(std::ostream& os, const ScalarFieldGrid& g) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (g.masked(i, j)) continue;
            const double v = g.at(i, j);
            if (!any) {
                lo = hi = v;
                any = true;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    const double span = hi > lo ? hi - lo : 1.0;
    os << "P2\n" << g.nx << ' ' << g.ny << "\n255\n";
    for (int j = g.ny - 1; j >= 0; --j) { // top row first
        for (int i = 0; i < g.nx; ++i) {
            int px = 0;
            if (!g.masked(i, j)) {
                px = static_cast<int>(std::lround(255.0 * (g.at(i, j) - lo) / span));
                px = std::clamp(px, 0, 255);
            }
            os << px << (i + 1 < g.nx ? ' ' : '\n');
        }
    }
}

void write_ridge_csv(std::ostream& os, const std::vector<RidgePoint>& ridge) {
    os << "j,y,x,i,valid\n";
    for (const RidgePoint& r : ridge) {
        os << r.j << ',' << fmt17(r.y) << ',' << fmt17(r.x) << ',' << r.i << ','
           << (r.valid ? 1 : 0) << '\n';
    }
}

void write_error_records_csv(std::ostream& os, const std::vector<ManifoldErrorRecord>& recs) {
    os << "p,t,e_x,e_y,e_perp,e_par,reliable,escaped\n";
    for (const ManifoldErrorRecord& r : recs) {
        os << fmt17(r.p) << ',' << fmt17(r.t) << ',' << fmt17(r.e.x) << ',' << fmt17(r.e.y) << ','
           << fmt17(r.e_perp) << ',' << fmt17(r.e_par) << ',' << (r.reliable ? 1 : 0) << ','
           << (r.escaped ? 1 : 0) << '\n';
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open output file: " + path);
    out << text;
    if (!out) throw config_error("write failed: " + path);
}

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 2) return {lo};
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

} // namespace flowctl
