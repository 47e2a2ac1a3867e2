#pragma once

#include <memory>

#include "flowctl/bounds.hpp"
#include "flowctl/config.hpp"
#include "flowctl/control.hpp"
#include "flowctl/ftle.hpp"
#include "flowctl/manifold.hpp"
#include "flowctl/runio.hpp"
#include "flowctl/taylor_green.hpp"

namespace flowctl {

// Everything a run needs, built from a Config. The field and manifold are
// heap-held so the internal borrow chain (manifold -> field, control ->
// manifold) survives moves of the setup.
struct RunSetup {
    std::shared_ptr<VectorField2D> field;
    SaddleData saddle;
    ManifoldKind kind = ManifoldKind::stable;
    double time_anchor = 0.0;
    double p_end = 0.0;
    double eps = 0.0;
    std::shared_ptr<UnperturbedManifold> man;
    DesiredManifold des;
    ControlField ctl;

    std::vector<double> p_grid; // spans [p_end, p_cap] (or mirrored)
    std::vector<double> t_grid;

    bool is_taylor_green = false;
    TaylorGreenParams prm;
};

RunSetup build_run(const Config& cfg);

// x-abscissa of the target curve at height y and time t, found by solving
// target_y(p, t) = y over the covered parameter range (closed form for the
// built-in scenario, bisection otherwise). Returns false if y is not reached.
bool target_slice_x(const RunSetup& run, double t, double y, double& x_out);

IntegratorConfig integrator_from_config(const Config& cfg, const std::string& section);

} // namespace flowctl
