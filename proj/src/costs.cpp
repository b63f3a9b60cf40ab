#include "qot/costs.hpp"

#include <cmath>
#include <limits>

#include "qot/errors.hpp"

namespace qot {

namespace {

double pnorm_dist(const Vector& x, const Vector& y, double p) {
    if (p == 2.0) return (x - y).norm();
    if (std::isinf(p)) return (x - y).cwiseAbs().maxCoeff();
    double s = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) s += std::pow(std::abs(x[k] - y[k]), p);
    return std::pow(s, 1.0 / p);
}

double eval_cost(const CostSpec& spec, const Vector& x, const Vector& y) {
    switch (spec.kind) {
        case CostKind::SquaredEuclidean:
            return (x - y).squaredNorm();
        case CostKind::Euclidean:
            return (x - y).norm();
        case CostKind::PNorm:
            return pnorm_dist(x, y, spec.p);
        case CostKind::Custom:
            return spec.fn(x, y);
        case CostKind::Matrix:
            break;
    }
    throw Error("matrix cost has no pointwise evaluation");
}

// Max of |x - y| over x in box(P), y in box(Q); separable per coordinate.
double max_box_distance(const DiscreteMeasure& P, const DiscreteMeasure& Q) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < P.points.cols(); ++k) {
        const double loP = P.points.col(k).minCoeff(), hiP = P.points.col(k).maxCoeff();
        const double loQ = Q.points.col(k).minCoeff(), hiQ = Q.points.col(k).maxCoeff();
        const double gap = std::max(hiP - loQ, hiQ - loP);
        s += gap * gap;
    }
    return std::sqrt(s);
}

// Tightest constant consistent with the sampled values:
// max |C(i,j) - C(i',j')| / (|x_i - x_i'| + |y_j - y_j'|).
LipschitzEstimate scan_matrix(const Matrix& C, const DiscreteMeasure& P,
                              const DiscreteMeasure& Q) {
    const int n = P.size(), m = Q.size();
    Matrix dP(n, n), dQ(m, m);
    for (int i = 0; i < n; ++i)
        for (int i2 = 0; i2 < n; ++i2)
            dP(i, i2) = (P.points.row(i) - P.points.row(i2)).norm();
    for (int j = 0; j < m; ++j)
        for (int j2 = 0; j2 < m; ++j2)
            dQ(j, j2) = (Q.points.row(j) - Q.points.row(j2)).norm();
    double best = 0.0;
    bool probed = false;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            for (int i2 = 0; i2 < n; ++i2)
                for (int j2 = 0; j2 < m; ++j2) {
                    const double den = dP(i, i2) + dQ(j, j2);
                    if (den == 0.0) continue;
                    probed = true;
                    best = std::max(best, std::abs(C(i, j) - C(i2, j2)) / den);
                }
    if (!probed) return {1.0, true};  // single-atom degeneracy
    return {best, false};
}

}  // namespace

Matrix build_cost_matrix(const CostSpec& spec, const DiscreteMeasure& P,
                         const DiscreteMeasure& Q) {
    const int n = P.size(), m = Q.size();
    if (spec.kind == CostKind::Matrix) {
        if (spec.matrix.rows() != n || spec.matrix.cols() != m)
            throw DimensionMismatch("cost matrix shape vs supports");
        if (!spec.matrix.allFinite()) throw NonFiniteCost();
        return spec.matrix;
    }
    if (P.dim() != Q.dim()) throw DimensionMismatch("P and Q ambient dimension");
    if (spec.kind == CostKind::PNorm && !(spec.p >= 1.0))
        throw Error("p-norm cost needs p >= 1");
    if (spec.kind == CostKind::Custom && !spec.fn) throw Error("custom cost missing callable");
    Matrix C(n, m);
    for (int i = 0; i < n; ++i) {
        Vector x = P.points.row(i).transpose();
        for (int j = 0; j < m; ++j) {
            C(i, j) = eval_cost(spec, x, Q.points.row(j).transpose());
            if (!std::isfinite(C(i, j))) throw NonFiniteCost();
        }
    }
    return C;
}

LipschitzEstimate lipschitz_constant(const CostSpec& spec, const DiscreteMeasure& P,
                                     const DiscreteMeasure& Q) {
    switch (spec.kind) {
        case CostKind::Euclidean:
            return {1.0, false};
        case CostKind::PNorm: {
            // |z|_p <= |z|_2 for p >= 2, else |z|_p <= d^(1/p - 1/2) |z|_2.
            const double d = static_cast<double>(P.dim());
            const double L =
                spec.p >= 2.0 ? 1.0 : std::pow(d, 1.0 / spec.p - 0.5);
            return {L, false};
        }
        case CostKind::SquaredEuclidean:
            // Gradient bound 2 sup |x-y| on the support bounding boxes.
            return {2.0 * max_box_distance(P, Q), false};
        case CostKind::Custom:
            if (spec.lipschitz_L) {
                if (!(*spec.lipschitz_L > 0.0)) throw Error("lipschitz_L must be positive");
                return {*spec.lipschitz_L, false};
            }
            return scan_matrix(build_cost_matrix(spec, P, Q), P, Q);
        case CostKind::Matrix:
            return scan_matrix(build_cost_matrix(spec, P, Q), P, Q);
    }
    throw Error("unreachable cost kind");
}

double modulus_radius(const Modulus& modulus, double eps, double R) {
    if (!(eps > 0.0)) throw Error("eps must be positive");
    if (!(R > 0.0)) throw NonpositiveRadius("truncation radius R");
    if (!modulus.eval) throw MissingModulus();

    if (modulus.coordinatewise && modulus.inverse) {
        const double r = std::min(modulus.inverse(eps / 8.0), R);
        if (!(r > 0.0)) throw ZeroRadius();
        return r;
    }

    // Criterion is monotone in r, so the admissible set is an interval [0, r*].
    const auto admissible = [&](double r) {
        return modulus.coordinatewise ? (modulus.eval(r) <= eps / 8.0)
                                      : (2.0 * modulus.eval(r) + modulus.eval(2.0 * r) <= eps / 2.0);
    };

    if (admissible(R)) return R;
    double lo = 0.0, hi = R;
    // Bisect to relative width 1e-12 (plus an absolute floor near denormals).
    while (hi - lo > 1e-12 * hi && hi > 1e-280) {
        const double mid = 0.5 * (lo + hi);
        (admissible(mid) ? lo : hi) = mid;
    }
    if (!(lo > 0.0) || hi <= 1e-280) throw ZeroRadius();
    return lo;
}

}  // namespace qot
