#pragma once

#include <utility>

#include "qot/dual_core.hpp"

namespace qot {

enum class PLVariant { Lipschitz, Modulus, ConnectedLipschitz };

// Certified curvature/conditioning constants. By construction
// beta = kappa * alpha / 4 and gamma = 4 / beta, with kappa, alpha <= 1.
struct PLConstants {
    double kappa = 0.0;
    double alpha = 0.0;
    double beta_eps = 0.0;
    double gamma_eps = 0.0;
    double radius = 0.0;  // localization ball radius behind alpha/kappa
    PLVariant variant = PLVariant::Lipschitz;
    bool empirical = false;  // any geometry input was inferred from data
};

// Lipschitz-cost constants at regularization eps in ambient dimension d:
//   kappa = delta_P * min(eps / 8L, 1)^d
//   alpha = (lambda/Lambda)^2 * inf_y Q(B_{eps/8L}(y)) / ceil(8L diam / eps)^(d+2)
PLConstants compute_pl_constants(const GeometryConstants& geo, double eps, int d);

// Same skeleton with the radius from modulus_radius(modulus, eps, R) and the
// ceiling term ceil(diam / radius).
PLConstants compute_pl_constants_modulus(const GeometryConstants& geo, const Modulus& modulus,
                                         double eps, int d, double R);

// Connected (non-convex) support: delta_P is replaced by
// delta_tilde = min(1, lambda_P * delta_Omega) and alpha picks up the path
// overlap factor C_Omega >= 1 in its denominator.
PLConstants compute_pl_constants_connected(const GeometryConstants& geo, double eps, int d,
                                           double C_Omega,
                                           std::optional<double> delta_P_tilde = {},
                                           std::optional<double> delta_Omega = {});

// (C, r0): sup-norm localization of pot against pot_star and the safe
// interpolation horizon r0 = min(eps / 2C, 1)  (r0 = 1 when C = 0).
std::pair<double, double> localization_radius(const ProblemInstance& inst,
                                              const DualPotentials& pot,
                                              const DualPotentials& pot_star);

// gamma * max(C, eps) * ||grad||^2 / (objective(pot_star) - objective(pot)).
// >= 1 certifies the gradient-dominance inequality at pot. Returns +inf when
// the gap is below 1e-14 (noise floor). Throws ReferenceNotOptimal when
// pot_star fails its first-order conditions at foc_tol.
double pl_ratio(const ProblemInstance& inst, const DualPotentials& pot,
                const DualPotentials& pot_star, const PLConstants& consts,
                double foc_tol = 1e-7);

// gamma * max(C, eps) * ||grad|| / ||oplus difference||_{L2}; >= 1 certifies
// the error-bound inequality. +inf when the distance is below 1e-14.
double error_bound_ratio(const ProblemInstance& inst, const DualPotentials& pot,
                         const DualPotentials& pot_star, const PLConstants& consts,
                         double foc_tol = 1e-7);

}  // namespace qot
