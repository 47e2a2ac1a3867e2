#pragma once

#include <functional>
#include <vector>

#include "flowctl/control.hpp"
#include "flowctl/manifold.hpp"

namespace flowctl {

// Constants feeding the rigorous error estimates.
struct BoundConstants {
    double sup_f = 0.0;   // sup |f| over the domain
    double sup_Df = 0.0;  // sup ||Df||
    double sup_D2f = 0.0; // sup ||D^2 f||
    double C_g = 0.0;     // sup (|g| + ||Dg||) of the control
    double C_m = 0.0;     // closeness constant of the desired manifold (per kind)
    double eps = 0.0;
    bool converged = false; // grid-doubling stabilized within tolerance

    double C_f() const { return sup_f + sup_Df + sup_D2f; }
    double prefactor() const { return C_m * C_g + 0.5 * C_m * C_m * C_f(); }
};

struct ConstantsOptions {
    int n0 = 64;             // coarsest sampling grid (cell centers)
    int doublings = 2;       // refinements: n0, 2 n0, 4 n0, ...
    double conv_tol = 0.05;  // relative change for the convergence flag
    std::vector<double> t_samples{0.0}; // times at which the control is sampled
};

// Sample sup-norms of the field (and optionally of a control field) on
// repeatedly doubled cell-center grids. C_m and eps are left for the caller.
BoundConstants estimate_constants(const VectorField2D& field, const ControlField* ctl,
                                  const ConstantsOptions& opt = {});

// Error-bound evaluator for one manifold. All the integrals in the estimates
// depend on (p, t) only through sigma = t - time_anchor + p, so cumulative
// quadratures along the manifold are computed once:
//   G(s)   = int trace Df,
//   K(s)   = int |f| exp(-G)           (the exp-weighted speed),
//   Phi(s) = int (|f| + 2 C_f W)/|f|^2 with W the perpendicular-kernel integral,
// with closed-form linearized tails past the near-saddle cap.
class ErrorBounds {
public:
    ErrorBounds(const UnperturbedManifold& man, double C_f, double quad_tol = 1e-9);

    // |f| along the manifold, continued past the cap
    double phi(double sigma) const;
    // perpendicular estimate divided by prefactor * eps^2
    double perp_quotient(double sigma) const;
    // cumulative tangential integrand, continued past the cap
    double par_integral(double sigma) const;

    double perp(const BoundConstants& bc, double p, double t) const;
    double par(const BoundConstants& bc, double p, double t) const;

    // value of the perpendicular estimate deep along the saddle approach
    double perp_limit_near_saddle(const BoundConstants& bc) const;

    double sigma_min() const { return s_min_; }
    double sigma_max() const { return s_max_; }
    double C_f() const { return C_f_; }

private:
    const UnperturbedManifold* man_;
    double C_f_;
    double s_min_, s_max_;
    Trajectory gk_;   // state (G, K) over sigma
    Trajectory phi_;  // state (Phi, 0) over sigma
    double K_end_;    // stable: K(inf); unstable: -K measured below sigma_min
    double lam_near_; // contraction rate at the near saddle (lambda_u or -lambda_s)

    double G_at(double s) const { return gk_.eval(s).x; }
    double K_at(double s) const { return gk_.eval(s).y; }
};

} // namespace flowctl
