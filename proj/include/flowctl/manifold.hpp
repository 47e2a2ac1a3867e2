#pragma once

#include <functional>
#include <string>
#include <vector>

#include "flowctl/integrate.hpp"
#include "flowctl/vector_field.hpp"

namespace flowctl {

enum class ManifoldKind { stable, unstable };

// One-dimensional global invariant manifold segment of a saddle, parametrized
// so that d/dp x(p) = f(x(p)) (p is trajectory time up to a shift; the shift is
// fixed by placing p = 0 at a prescribed arclength from the saddle).
//
// Stable manifolds cover p in [p_end, p_cap] and approach the saddle as the
// argument grows; unstable ones cover [p_cap, p_end] and approach it as the
// argument decreases. Curve samples along a moving point are read at
// arg = t - time_anchor + p.
struct UnperturbedManifold {
    ManifoldKind kind = ManifoldKind::stable;
    SaddleData saddle;
    double time_anchor = 0.0;      // T offset pairing parameter with time
    double anchor_arclength = 0.0; // arclength from saddle to the p = 0 point
    double eta = 0.0;              // |f| floor defining usable coverage
    double seed_gap = 0.0;         // distance from saddle to the seed sample

    Trajectory curve;              // node "times" are p values, ascending
    std::vector<double> cum_s;     // arclength from the first node, per node
    double p_min = 0.0, p_max = 0.0;
    double p_cap = 0.0;            // near-saddle coverage end (seed parameter)

    const VectorField2D* field = nullptr;

    Vec2 pos(double p) const { return curve.eval(p); }
    Vec2 vel(double p) const { return field ? field->eval(pos(p)) : curve.deriv(p); }
    double speed(double p) const { return norm(vel(p)); }

    double arg(double p, double t) const { return t - time_anchor + p; }
    bool covers(double a) const { return a >= p_min && a <= p_max; }

    // coverage continued past the cap by the linearized saddle decay
    Vec2 pos_ext(double a) const;
    double speed_ext(double a) const;

    // arclength of the curve between two covered parameters
    double arclength(double p_from, double p_to) const;
    // arclength of the time-t slice {x(arg(p,t)) : p in [p_lo, p_hi] ∩ coverage}
    double slice_arclength(double t, double p_lo, double p_hi) const;
};

struct ManifoldOptions {
    double delta_frac = 1e-6;       // seed offset / domain diagonal
    double anchor_arclength = -1.0; // < 0: use 0.1 * domain diagonal
    double eta_frac = 1e-8;         // |f| floor / velocity scale
    int branch = +1;                // seed on a + branch * delta * v side
    double chunk = 1.0;             // integration chunk (time units)
    int max_chunks = 500;
    // max_step 2e-3 keeps the per-interval Simpson arclength bias small enough
    // that the anchor parameter (hence the seeding-slice congruence residual)
    // stays well inside its tolerance
    IntegratorConfig integ{StepMethod::rk45_adaptive, 1e-12, 1e-12, 1e-2, 2e-3, 2000000};
};

// Grow the manifold from a seed near the saddle out to parameter p_end
// (p_end < 0 reaching away for stable manifolds, > 0 for unstable ones).
// Throws validation_error when the requested range cannot be covered
// (domain escape or |f| dropping below eta en route).
UnperturbedManifold compute_manifold(const VectorField2D& field, const SaddleData& saddle,
                                     ManifoldKind kind, double p_end, double time_anchor,
                                     const ManifoldOptions& opt = {});

// Time-varying target curve for the perturbed manifold, O(eps) close to the
// unperturbed one at equal parameter.
struct DesiredManifold {
    double eps = 0.0;
    std::function<Vec2(double, double)> target;    // (p, t)
    std::function<Vec2(double, double)> target_dp; // optional analytic d/dp
    double h_p = 1e-6;                             // FD step when target_dp is absent

    Vec2 value(double p, double t) const { return target(p, t); }
    Vec2 dp(double p, double t) const;
};

// Normal-displacement graph of the target over the unperturbed slice at time t.
struct MappabilityWindow {
    double t = 0.0;
    double p_lo = 0.0, p_hi = 0.0; // largest usable contiguous window, empty if p_lo >= p_hi
    bool monotone = false;
    std::vector<double> p;  // grid points inside the window
    std::vector<double> q;  // parameter of the target point on the normal line at p
    std::vector<double> r;  // signed normal displacement there

    bool empty() const { return !(p_hi > p_lo); }
};

struct ValidationIssue {
    std::string what;
    double p = 0.0, t = 0.0;
    double value = 0.0, tol = 0.0;
};

struct ValidationReport {
    double C_closeness = 0.0;      // sup (|target - x| + |target_dp - f(x)|) / eps
    double K_smoothness = 0.0;     // sup |target_dp| + |target_dpp|
    double congruence_max = 0.0;   // worst |f(x)^T (target - x)| at t = 0
    double congruence_tol = 0.0;
    bool congruent = false;
    bool limit_ok = false;         // Cauchy test of the far-saddle offset limit
    std::vector<MappabilityWindow> windows;
    std::vector<ValidationIssue> failures;

    bool ok() const { return congruent && limit_ok && failures.empty(); }
};

struct ValidateOptions {
    double tol_cong_frac = 1e-8; // congruence tol = frac * |f| * eps * diagonal
    double slope_tol = 1e-6;     // minimal dq/dp for monotonicity
};

MappabilityWindow mappability_window(const UnperturbedManifold& man, const DesiredManifold& des,
                                     double t, const std::vector<double>& p_grid,
                                     double slope_tol = 1e-6);

ValidationReport validate_desired(const VectorField2D& field, const UnperturbedManifold& man,
                                  const DesiredManifold& des, const std::vector<double>& p_grid,
                                  const std::vector<double>& t_grid,
                                  const ValidateOptions& opt = {});

} // namespace flowctl
