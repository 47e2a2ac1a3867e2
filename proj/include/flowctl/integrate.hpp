#pragma once

#include <functional>
#include <vector>

#include "flowctl/errors.hpp"
#include "flowctl/geometry.hpp"

namespace flowctl {

using Rhs = std::function<Vec2(Vec2, double)>;

enum class StepMethod { rk4_fixed, rk45_adaptive };

struct IntegratorConfig {
    StepMethod method = StepMethod::rk45_adaptive;
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    double dt = 1e-2;        // step size for rk4_fixed
    double max_step = 0.0;   // adaptive step cap, 0 = span/10
    long max_steps = 2000000;
};

// Time-ordered samples with node derivatives; dense evaluation is the
// C^1 cubic Hermite through consecutive nodes. Holds for backward
// integrations too (samples are stored time-ascending regardless).
class Trajectory {
public:
    std::vector<double> t;
    std::vector<Vec2> x;
    std::vector<Vec2> v; // rhs at the nodes

    size_t size() const { return t.size(); }
    double t_front() const { return t.front(); }
    double t_back() const { return t.back(); }

    Vec2 eval(double time) const;
    Vec2 deriv(double time) const;

    void append(double time, Vec2 pos, Vec2 vel);
    void reverse(); // flip sample order (used after backward integration)

private:
    size_t locate(double time) const;
};

// Integrate from (x0, t0) to t1 (either direction). Throws escape_error if
// an escape rectangle is given and the path leaves it, numerical_error on
// step-budget exhaustion or non-finite state.
Trajectory integrate_ode(const Rhs& rhs, Vec2 x0, double t0, double t1,
                         const IntegratorConfig& cfg = {}, const Rect* escape = nullptr);

// Endpoint-only variant for flow maps: escapes freeze at the boundary
// crossing instead of throwing.
struct PointResult {
    Vec2 x;
    bool escaped = false;
    double t_end = 0.0; // exit time if escaped, else target time
};
PointResult advance_point(const Rhs& rhs, Vec2 x0, double t0, double t1,
                          const IntegratorConfig& cfg, const Rect* escape = nullptr);

// Map every seed through the flow over [t0, t0+tau]; trajectories that leave
// `domain` are frozen at the crossing and flagged. `threads` <= 0 picks the
// hardware count. Results are deterministic across thread counts.
struct FlowMapResult {
    std::vector<Vec2> end;
    std::vector<uint8_t> escaped;
};
FlowMapResult flow_map(const Rhs& rhs, const std::vector<Vec2>& seeds, double t0, double tau,
                       const IntegratorConfig& cfg, const Rect& domain, int threads = 0);

} // namespace flowctl
