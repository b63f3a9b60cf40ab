#pragma once

// Shared problem fixtures for the unit and acceptance tests.

#include "qot/dual_core.hpp"
#include "qot/measures.hpp"

namespace fixtures {

using namespace qot;

// Uniform two-point marginals on {0, 1} with cost |x - y|.
inline ProblemInstance two_by_two(double eps) {
    Matrix pts(2, 1);
    pts << 0.0, 1.0;
    Vector w(2);
    w << 0.5, 0.5;
    DiscreteMeasure P = make_measure(pts, w);
    DiscreteMeasure Q = P;
    CostSpec spec;
    spec.kind = CostKind::Euclidean;
    GeometryConstants geo = empirical_geometry(P, Q, DensityBounds{1.0, 1.0}, 1.0, 1.0);
    return make_instance(P, Q, spec, eps, geo);
}

// Single atom at zero on both sides, zero cost.
inline ProblemInstance one_atom(double eps) {
    Matrix pts(1, 1);
    pts << 0.0;
    Vector w(1);
    w << 1.0;
    DiscreteMeasure mu = make_measure(pts, w);
    CostSpec spec;
    spec.kind = CostKind::Euclidean;
    GeometryConstants geo = empirical_geometry(mu, mu, DensityBounds{1.0, 1.0}, 1.0, 1.0);
    return make_instance(mu, mu, spec, eps, geo);
}

}  // namespace fixtures
