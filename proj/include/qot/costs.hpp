#pragma once

#include <functional>
#include <optional>

#include "qot/measures.hpp"
#include "qot/types.hpp"

namespace qot {

enum class CostKind { Matrix, SquaredEuclidean, Euclidean, PNorm, Custom };

// Continuity description of a cost: eval is a modulus of continuity
// (nondecreasing, vanishing at 0) with respect to |x-x'| + |y-y'|.
// When coordinatewise is set, eval bounds the oscillation in each argument
// separately and the larger admissible radius applies.
struct Modulus {
    std::function<double(double)> eval;
    std::function<double(double)> inverse;  // optional exact inverse of eval
    bool coordinatewise = false;
};

struct CostSpec {
    CostKind kind = CostKind::SquaredEuclidean;
    Matrix matrix;                // kind == Matrix
    double p = 2.0;               // kind == PNorm
    std::function<double(const Vector&, const Vector&)> fn;  // kind == Custom
    std::optional<double> lipschitz_L;  // user override for Custom
    std::optional<Modulus> modulus;
};

Matrix build_cost_matrix(const CostSpec& spec, const DiscreteMeasure& P,
                         const DiscreteMeasure& Q);

struct LipschitzEstimate {
    double value;
    // Set when no pair of distinct supports exists to probe and the value
    // fell back to 1; downstream constants are then not certified.
    bool degenerate_default = false;
};

// Lipschitz constant of the cost w.r.t. |x-x'| + |y-y'| on the supports.
// Closed forms where available, tight discrete scan for matrix/custom costs.
LipschitzEstimate lipschitz_constant(const CostSpec& spec, const DiscreteMeasure& P,
                                     const DiscreteMeasure& Q);

// Largest admissible localization radius in [0, R] for regularization eps:
// sup { r : 2 w(r) + w(2r) <= eps/2 }, or w^{-1}(eps/8) ^ R for a
// coordinatewise modulus. Bisection at relative tolerance 1e-12 when no
// closed-form inverse is available.
double modulus_radius(const Modulus& modulus, double eps, double R);

}  // namespace qot
