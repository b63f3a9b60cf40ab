#include "qot/constants.hpp"

#include <cmath>
#include <limits>

#include "qot/errors.hpp"

namespace qot {

namespace {

constexpr double kSentinelFloor = 1e-14;

// Mathematical ceiling with a relative downward nudge so values that are
// integers up to float noise do not get bumped a full step.
double guarded_ceil(double x) {
    return std::ceil(x * (1.0 - 1e-12));
}

void check_geometry(const GeometryConstants& geo, double eps, int d) {
    if (!(eps > 0.0)) throw MissingGeometry("eps must be positive");
    if (d <= 0) throw MissingGeometry("ambient dimension must be positive");
    if (!(geo.lambda_P > 0.0) || !(geo.Lambda_P >= geo.lambda_P))
        throw MissingGeometry("need 0 < lambda_P <= Lambda_P");
    if (!(geo.delta_P > 0.0 && geo.delta_P <= 1.0))
        throw MissingGeometry("delta_P must lie in (0,1]");
    if (!(geo.lipschitz_L > 0.0)) throw MissingGeometry("lipschitz_L unresolved");
    if (!(geo.diam_Omega >= 0.0)) throw MissingGeometry("diam_Omega must be nonnegative");
    if (!geo.ball_inf_fn) throw MissingGeometry("ball_inf_fn unresolved");
}

// Shared assembly once the localization radius and the ceiling argument are
// fixed. C_Omega = 1 recovers the convex case.
PLConstants assemble(const GeometryConstants& geo, int d, double radius,
                     double ceil_arg, double delta_eff, double C_Omega,
                     PLVariant variant) {
    const double q0 = geo.ball_inf_fn(radius);
    if (!(q0 > 0.0) || !(q0 <= 1.0))
        throw MissingGeometry("ball mass at the localization radius must lie in (0,1]");

    const double ceil_term = ceil_arg == 0.0 ? 1.0 : guarded_ceil(ceil_arg);
    const double ratio = geo.lambda_P / geo.Lambda_P;

    PLConstants out;
    out.variant = variant;
    out.empirical = geo.empirical;
    out.radius = radius;
    out.kappa = delta_eff * std::pow(std::min(radius, 1.0), d);
    out.alpha = ratio * ratio * q0 /
                (C_Omega * std::pow(ceil_term, static_cast<double>(d + 2)));
    out.beta_eps = 0.25 * out.kappa * out.alpha;
    out.gamma_eps = 4.0 / out.beta_eps;

    // Independent transcription of the fully expanded closed form; a
    // disagreement here means an assembly bug, not bad input.
    const double gamma_direct = 16.0 * (1.0 / delta_eff) *
                                std::pow(std::max(1.0 / radius, 1.0), d) *
                                (1.0 / (ratio * ratio)) * C_Omega *
                                std::pow(ceil_term, static_cast<double>(d + 2)) / q0;
    if (!(std::abs(out.gamma_eps - gamma_direct) <= 1e-9 * gamma_direct))
        throw Error("internal: factored and expanded constants disagree");
    return out;
}

}  // namespace

PLConstants compute_pl_constants(const GeometryConstants& geo, double eps, int d) {
    check_geometry(geo, eps, d);
    const double L = geo.lipschitz_L;
    const double radius = eps / (8.0 * L);
    const double ceil_arg = 8.0 * L * geo.diam_Omega / eps;
    return assemble(geo, d, radius, ceil_arg, geo.delta_P, 1.0, PLVariant::Lipschitz);
}

PLConstants compute_pl_constants_modulus(const GeometryConstants& geo, const Modulus& modulus,
                                         double eps, int d, double R) {
    // The modulus carries the cost regularity, so lipschitz_L may be absent.
    GeometryConstants geo_check = geo;
    if (geo_check.lipschitz_L == 0.0) geo_check.lipschitz_L = 1.0;
    check_geometry(geo_check, eps, d);
    const double radius = modulus_radius(modulus, eps, R);
    const double ceil_arg = geo.diam_Omega / radius;
    PLConstants out = assemble(geo, d, radius, ceil_arg, geo.delta_P, 1.0,
                               PLVariant::Modulus);
    return out;
}

PLConstants compute_pl_constants_connected(const GeometryConstants& geo, double eps, int d,
                                           double C_Omega,
                                           std::optional<double> delta_P_tilde,
                                           std::optional<double> delta_Omega) {
    check_geometry(geo, eps, d);
    if (!(C_Omega >= 1.0)) throw COmegaLessThanOne();
    double delta_tilde;
    if (delta_P_tilde) {
        delta_tilde = *delta_P_tilde;
    } else if (delta_Omega) {
        delta_tilde = std::min(1.0, geo.lambda_P * (*delta_Omega));
    } else {
        throw MissingGeometry("connected variant needs delta_P_tilde or delta_Omega");
    }
    if (!(delta_tilde > 0.0 && delta_tilde <= 1.0))
        throw MissingGeometry("delta_P_tilde must lie in (0,1]");
    const double L = geo.lipschitz_L;
    const double radius = eps / (8.0 * L);
    const double ceil_arg = 8.0 * L * geo.diam_Omega / eps;
    return assemble(geo, d, radius, ceil_arg, delta_tilde, C_Omega,
                    PLVariant::ConnectedLipschitz);
}

std::pair<double, double> localization_radius(const ProblemInstance& inst,
                                              const DualPotentials& pot,
                                              const DualPotentials& pot_star) {
    const double C = oplus_sup_distance(pot, pot_star);
    const double r0 = C == 0.0 ? 1.0 : std::min(inst.eps / (2.0 * C), 1.0);
    return {C, r0};
}

double pl_ratio(const ProblemInstance& inst, const DualPotentials& pot,
                const DualPotentials& pot_star, const PLConstants& consts,
                double foc_tol) {
    if (foc_residual(inst, pot_star) > foc_tol) throw ReferenceNotOptimal();
    const double gap = gamma_objective(inst, pot_star) - gamma_objective(inst, pot);
    if (gap < kSentinelFloor) return std::numeric_limits<double>::infinity();
    auto [u, v] = gamma_gradient(inst, pot);
    const double grad = gradient_l2_norm(inst, u, v);
    const double C = oplus_sup_distance(pot, pot_star);
    return grad * grad * consts.gamma_eps * std::max(C, inst.eps) / gap;
}

double error_bound_ratio(const ProblemInstance& inst, const DualPotentials& pot,
                         const DualPotentials& pot_star, const PLConstants& consts,
                         double foc_tol) {
    if (foc_residual(inst, pot_star) > foc_tol) throw ReferenceNotOptimal();
    const double dist = oplus_l2_distance(inst, pot, pot_star);
    if (dist < kSentinelFloor) return std::numeric_limits<double>::infinity();
    auto [u, v] = gamma_gradient(inst, pot);
    const double grad = gradient_l2_norm(inst, u, v);
    const double C = oplus_sup_distance(pot, pot_star);
    return consts.gamma_eps * std::max(C, inst.eps) * grad / dist;
}

}  // namespace qot
