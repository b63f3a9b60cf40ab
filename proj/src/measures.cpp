#include "qot/measures.hpp"

#include <cmath>
#include <limits>

#include "qot/errors.hpp"

namespace qot {

DiscreteMeasure make_measure(const Matrix& points, const Vector& weights) {
    if (points.rows() != weights.size()) throw LengthMismatch();
    if (points.rows() == 0) throw EmptySupport();
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0)) throw NegativeWeight();  // also catches NaN
    }

    // Merge exactly-equal atoms (grid construction plus float noise makes
    // duplicates common; merging preserves the measure). First occurrence
    // keeps its slot so the construction is order-deterministic.
    const Eigen::Index n_in = points.rows();
    std::vector<Eigen::Index> keep;
    std::vector<double> merged;
    keep.reserve(n_in);
    merged.reserve(n_in);
    for (Eigen::Index i = 0; i < n_in; ++i) {
        bool dup = false;
        for (size_t k = 0; k < keep.size(); ++k) {
            if (points.row(i) == points.row(keep[k])) {
                merged[k] += weights[i];
                dup = true;
                break;
            }
        }
        if (!dup) {
            keep.push_back(i);
            merged.push_back(weights[i]);
        }
    }

    DiscreteMeasure mu;
    mu.points.resize(static_cast<Eigen::Index>(keep.size()), points.cols());
    mu.weights.resize(static_cast<Eigen::Index>(keep.size()));
    for (size_t k = 0; k < keep.size(); ++k) {
        mu.points.row(static_cast<Eigen::Index>(k)) = points.row(keep[k]);
        mu.weights[static_cast<Eigen::Index>(k)] = merged[k];
    }

    const double total = mu.weights.sum();
    if (!(total > 0.0) || !std::isfinite(total)) throw ZeroTotalMass();
    // Only renormalize when needed: keeps rebuild-from-output bit-identical.
    if (std::abs(total - 1.0) > 1e-12) mu.weights /= total;
    return mu;
}

DiscreteMeasure grid_discretize(const std::function<double(const Vector&)>& density,
                                const Box& box, int cells_per_axis) {
    const int d = static_cast<int>(box.lo.size());
    if (box.hi.size() != d || d == 0) throw DimensionMismatch("box bounds");
    if (cells_per_axis <= 0) throw EmptySupport("cells_per_axis must be positive");
    for (int k = 0; k < d; ++k) {
        if (!(box.lo[k] <= box.hi[k])) throw DimensionMismatch("box lo > hi");
    }

    Eigen::Index n = 1;
    for (int k = 0; k < d; ++k) n *= cells_per_axis;

    Matrix pts(n, d);
    Vector w(n);
    Vector h = (box.hi - box.lo) / static_cast<double>(cells_per_axis);
    std::vector<int> idx(d, 0);
    double min_pos = std::numeric_limits<double>::infinity();
    double max_pos = 0.0;
    for (Eigen::Index row = 0; row < n; ++row) {
        Vector c(d);
        for (int k = 0; k < d; ++k) c[k] = box.lo[k] + (idx[k] + 0.5) * h[k];
        const double rho = density(c);
        if (!std::isfinite(rho) || rho < 0.0)
            throw NegativeWeight("density must be finite and nonnegative");
        pts.row(row) = c.transpose();
        w[row] = rho;  // common cell volume cancels under normalization
        if (rho > 0.0) {
            min_pos = std::min(min_pos, rho);
            max_pos = std::max(max_pos, rho);
        }
        for (int k = d - 1; k >= 0; --k) {
            if (++idx[k] < cells_per_axis) break;
            idx[k] = 0;
        }
    }
    if (max_pos == 0.0) throw AllZeroDensity();

    DiscreteMeasure mu = make_measure(pts, w);
    // Bounds are over cells carrying mass; empty cells are not support.
    mu.grid_density_range = std::make_pair(min_pos, max_pos);
    mu.from_convex_grid = true;
    return mu;
}

double ball_measure_inf(const DiscreteMeasure& mu, double r) {
    if (!(r > 0.0)) throw NonpositiveRadius();
    const int n = mu.size();
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        double mass = 0.0;
        for (int j = 0; j < n; ++j) {
            if ((mu.points.row(j) - mu.points.row(i)).norm() < r) mass += mu.weights[j];
        }
        best = std::min(best, mass);
    }
    return best;
}

double diameter(const DiscreteMeasure& mu) {
    const int n = mu.size();
    double d2 = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            d2 = std::max(d2, (mu.points.row(i) - mu.points.row(j)).squaredNorm());
    return std::sqrt(d2);
}

GeometryConstants empirical_geometry(const DiscreteMeasure& P, const DiscreteMeasure& Q,
                                     std::optional<DensityBounds> density_bounds,
                                     std::optional<double> delta_P,
                                     std::optional<double> lipschitz_L) {
    GeometryConstants geo;
    if (density_bounds) {
        geo.lambda_P = density_bounds->lambda;
        geo.Lambda_P = density_bounds->Lambda;
    } else if (P.grid_density_range) {
        geo.lambda_P = P.grid_density_range->first;
        geo.Lambda_P = P.grid_density_range->second;
        geo.empirical = true;
    } else {
        throw MissingDensityBounds("no density bounds supplied and P has no grid provenance");
    }
    if (!(geo.lambda_P > 0.0) || !(geo.Lambda_P >= geo.lambda_P))
        throw MissingDensityBounds("need 0 < lambda_P <= Lambda_P");

    if (delta_P) {
        geo.delta_P = *delta_P;
    } else if (P.from_convex_grid) {
        geo.delta_P = 1.0;  // convex-box support: full ball-volume fraction
        geo.empirical = true;
    } else {
        throw MissingDensityBounds("delta_P required for measures without convex-grid provenance");
    }
    if (!(geo.delta_P > 0.0 && geo.delta_P <= 1.0))
        throw MissingDensityBounds("delta_P must lie in (0,1]");

    geo.diam_Omega = diameter(P);
    if (lipschitz_L) geo.lipschitz_L = *lipschitz_L;

    DiscreteMeasure Qcopy = Q;
    geo.ball_inf_fn = [Qcopy](double r) { return ball_measure_inf(Qcopy, r); };
    return geo;
}

}  // namespace qot
