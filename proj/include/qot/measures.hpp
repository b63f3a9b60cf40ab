#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "qot/types.hpp"

namespace qot {

// Finitely supported probability measure. Invariants after construction:
// weights nonnegative, sum within 1e-12 of 1, at least one atom, atoms
// pairwise distinct (exact coordinate equality; duplicates were merged).
struct DiscreteMeasure {
    Matrix points;   // size n x d, one atom per row
    Vector weights;  // size n

    // Provenance from grid_discretize, used by empirical_geometry.
    // Range of the raw density over cells carrying positive mass.
    std::optional<std::pair<double, double>> grid_density_range;
    bool from_convex_grid = false;

    int size() const { return static_cast<int>(points.rows()); }
    int dim() const { return static_cast<int>(points.cols()); }
};

// Density/geometry description of an instance. lambda_P/Lambda_P bound the
// density of P on its support, delta_P is the ball-volume fraction of the
// support (1 for convex supports), ball_inf_fn(r) = inf_y Q(B_r(y)) over
// atoms y of Q with B_r open.
struct GeometryConstants {
    double lambda_P = 0.0;
    double Lambda_P = 0.0;
    double delta_P = 0.0;
    double diam_Omega = 0.0;
    double lipschitz_L = 0.0;  // 0 means "not resolved yet"
    std::function<double(double)> ball_inf_fn;
    bool empirical = false;
};

// Axis-aligned box, lo and hi of equal dimension with lo <= hi componentwise.
struct Box {
    Vector lo;
    Vector hi;
};

DiscreteMeasure make_measure(const Matrix& points, const Vector& weights);

// Midpoint discretization of an (unnormalized) density over a box:
// cells_per_axis^d cells, one atom at each cell center, weight proportional
// to the density there. Zero-density cells keep their (zero-weight) atom.
DiscreteMeasure grid_discretize(const std::function<double(const Vector&)>& density,
                                const Box& box, int cells_per_axis);

// inf over atoms y of mu(B_r(y)), B_r(y) the open ball {x : |x-y| < r}.
// Strictly positive since every atom sees its own mass.
double ball_measure_inf(const DiscreteMeasure& mu, double r);

double diameter(const DiscreteMeasure& mu);

struct DensityBounds {
    double lambda;
    double Lambda;
};

// Assembles GeometryConstants from data plus whatever the caller can supply.
// Density bounds fall back to grid provenance; delta_P falls back to 1 for
// measures from a convex-box grid. Anything else must be given explicitly.
// lipschitz_L is left at 0 unless supplied; the cost module resolves it.
GeometryConstants empirical_geometry(const DiscreteMeasure& P, const DiscreteMeasure& Q,
                                     std::optional<DensityBounds> density_bounds = {},
                                     std::optional<double> delta_P = {},
                                     std::optional<double> lipschitz_L = {});

}  // namespace qot
