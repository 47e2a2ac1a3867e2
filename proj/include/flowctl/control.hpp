#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "flowctl/manifold.hpp"

namespace flowctl {

// Normal/tangential projections of the scaled manifold offset at (p, t):
//   M = [J f(y)]^T (target - y) / eps,  B = [f(y)]^T (target - y) / eps
// with y the unperturbed manifold point at arg = t - time_anchor + p.
struct ProjectionSample {
    double p = 0.0, t = 0.0;
    double M = 0.0, B = 0.0;
    double dM_dt = 0.0, dB_dt = 0.0;
};

ProjectionSample project_MB(const UnperturbedManifold& man, const DesiredManifold& des, double p,
                            double t);

// Fills the time derivatives with a five-point central stencil of width h_t.
ProjectionSample differentiate_MB(const UnperturbedManifold& man, const DesiredManifold& des,
                                  double p, double t, double h_t);

struct OnManifoldControl {
    double g_perp = 0.0;
    double g_par = 0.0;
    Vec2 g; // g_perp * Jf/|f| + g_par * f/|f|
};

// Raw component formulas at a covered argument; throws numerical_error when
// |f(y)| <= eta (too close to the saddle for the division).
OnManifoldControl control_components(const UnperturbedManifold& man, const DesiredManifold& des,
                                     double p, double t, double h_t);

struct SynthesisOptions {
    double h_t = -1.0;         // < 0: 1e-3 * min(1/lambda_u, 1)
    double tube_radius = -1.0; // < 0: 10 * eps * domain diagonal
    double tol_ext = 1e-8;     // nearest-point refinement tolerance (relative)
    int search_samples = 400;  // dense scan resolution for the nearest point
    std::function<Vec2(Vec2, double)> analytic_override; // full field g(x, t), optional
    double cross_check_tol = 1e-3; // allowed transverse mismatch, override vs formulas
};

// Control field defined on the manifold by the component formulas and extended
// off it by a compactly supported normal-tube bump; an analytic override, when
// present, replaces the tube evaluation entirely (it is cross-checked against
// the on-manifold formulas at synthesis time).
class ControlField {
public:
    const UnperturbedManifold* man = nullptr;
    DesiredManifold des;
    double h_t = 0.0;
    double tube_radius = 0.0;
    double tol_ext = 1e-8;
    int search_samples = 400;
    std::function<Vec2(Vec2, double)> analytic_override;

    double eps() const { return des.eps; }

    // component formulas with the near-saddle continuation: beyond the cap the
    // values at the capped argument are scaled by the linearized speed ratio
    OnManifoldControl on_manifold(double p, double t) const;

    Vec2 eval(Vec2 x, double t) const;

    // controlled right-hand side  f(x) + eps * g(x, t)
    Rhs controlled_rhs() const;

    // nearest desired-curve parameter to x at time t (dense scan + refinement)
    double nearest_parameter(Vec2 x, double t) const;
};

ControlField synthesize_control(const VectorField2D& field, const UnperturbedManifold& man,
                                const DesiredManifold& des, const SynthesisOptions& opt = {});

// columns: p,t,x,y,g_perp,g_par,g_x,g_y (positions on the desired curve)
void write_control_csv(std::ostream& os, const ControlField& ctl,
                       const std::vector<double>& p_grid, const std::vector<double>& t_grid);

} // namespace flowctl
