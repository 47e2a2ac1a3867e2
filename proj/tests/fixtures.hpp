#pragma once

// Shared fixtures: the cellular benchmark field and its two channel manifolds.
// Everything is built once (function-local statics) because the manifold
// computation, while fast, is not free.

#include "flowctl/manifold.hpp"
#include "flowctl/taylor_green.hpp"
#include "flowctl/vector_field.hpp"

namespace fix {

inline const flowctl::VectorField2D& tg_field() {
    static flowctl::VectorField2D f = flowctl::taylor_green_field({});
    return f;
}

inline const flowctl::SaddleData& tg_saddle() {
    static flowctl::SaddleData s = flowctl::find_saddle(tg_field(), {0.9, 0.1});
    return s;
}

inline const flowctl::SaddleData& tg_saddle_top() {
    static flowctl::SaddleData s = flowctl::find_saddle(tg_field(), {1.05, 0.95});
    return s;
}

// stable manifold of (1, 0) up the cell boundary: p = 0 at (1, 1/2),
// coverage [-1, ~1.27], time anchor T = -1
inline const flowctl::UnperturbedManifold& tg_manifold() {
    static flowctl::UnperturbedManifold m = [] {
        flowctl::ManifoldOptions opt;
        opt.anchor_arclength = 0.5;
        return flowctl::compute_manifold(tg_field(), tg_saddle(), flowctl::ManifoldKind::stable,
                                         -1.0, -1.0, opt);
    }();
    return m;
}

// unstable mirror: saddle (1, 1), branch seeded downward, p = 0 at (1, 1/2),
// coverage [~-1.27, 1], time anchor T = +1
inline const flowctl::UnperturbedManifold& tg_manifold_unstable() {
    static flowctl::UnperturbedManifold m = [] {
        flowctl::ManifoldOptions opt;
        opt.anchor_arclength = 0.5;
        opt.branch = -1;
        return flowctl::compute_manifold(tg_field(), tg_saddle_top(),
                                         flowctl::ManifoldKind::unstable, 1.0, 1.0, opt);
    }();
    return m;
}

} // namespace fix
