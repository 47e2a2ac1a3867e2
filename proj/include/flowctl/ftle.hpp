#pragma once

#include <vector>

#include "flowctl/integrate.hpp"
#include "flowctl/manifold.hpp"

namespace flowctl {

// Scalar samples on a uniform cell-centered grid over `bounds`.
// index (i, j) -> j * nx + i, i along x. mask = 1 marks unreliable cells
// (a trajectory in the finite-difference stencil left the domain).
struct ScalarFieldGrid {
    Rect bounds;
    int nx = 0, ny = 0;
    std::vector<double> v;
    std::vector<uint8_t> mask;

    double dx() const { return bounds.width() / nx; }
    double dy() const { return bounds.height() / ny; }
    double x_at(int i) const { return bounds.x_min + (i + 0.5) * dx(); }
    double y_at(int j) const { return bounds.y_min + (j + 0.5) * dy(); }
    double& at(int i, int j) { return v[static_cast<size_t>(j) * nx + i]; }
    double at(int i, int j) const { return v[static_cast<size_t>(j) * nx + i]; }
    uint8_t masked(int i, int j) const { return mask[static_cast<size_t>(j) * nx + i]; }
};

// Largest-stretch exponent of the flow map over [t0, t0+tau], computed from
// central differences of neighboring endpoints:  ln(sigma_max) / |tau|.
ScalarFieldGrid compute_ftle(const Rhs& rhs, Rect bounds, int nx, int ny, double t0, double tau,
                             const IntegratorConfig& cfg, const Rect& domain, int threads = 0);

struct RidgePoint {
    int j = 0;          // row index
    double y = 0.0;     // row center
    double x = 0.0;     // sub-cell ridge abscissa (parabolic refinement)
    int i = 0;          // argmax column
    bool valid = false; // row had a usable maximum inside the band
};

// Per-row argmax of the field inside the x-band, refined by a three-point
// parabola through the neighboring columns.
std::vector<RidgePoint> extract_ridge(const ScalarFieldGrid& grid, double x_lo, double x_hi);

// Controlled-trajectory deviation from the target curve, decomposed in the
// manifold frame at the matched argument. Trajectories are seeded on the
// target at t = 0 (the congruent initial slice) and integrated to each
// requested time.
struct ManifoldErrorRecord {
    double p = 0.0, t = 0.0;
    Vec2 e;                // trajectory - target
    double e_perp = 0.0;   // [Jf/|f|]^T e at the manifold point
    double e_par = 0.0;    // [f/|f|]^T e
    bool reliable = false; // in coverage, no escape, bounded transverse gain
    bool escaped = false;
};

struct MeasureOptions {
    IntegratorConfig integ;
    double gain_cap = 10.0; // |f(y(arg at 0))| / |f(y(arg at t))| above which the
                            // seeding-offset amplification makes samples unreliable
};

std::vector<ManifoldErrorRecord> measure_manifold_error(const Rhs& controlled,
                                                        const UnperturbedManifold& man,
                                                        const DesiredManifold& des,
                                                        const std::vector<double>& p_grid,
                                                        const std::vector<double>& t_grid,
                                                        const Rect& domain,
                                                        const MeasureOptions& opt = {});

} // namespace flowctl
