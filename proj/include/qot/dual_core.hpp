#pragma once

#include <utility>

#include "qot/costs.hpp"
#include "qot/measures.hpp"
#include "qot/types.hpp"

namespace qot {

// A fully materialized problem: marginals, cost matrix, regularization
// strength, and the geometry needed for the certified constants.
struct ProblemInstance {
    DiscreteMeasure P;
    DiscreteMeasure Q;
    Matrix cost;  // n x m
    double eps = 1.0;
    GeometryConstants geometry;

    int n() const { return P.size(); }
    int m() const { return Q.size(); }
};

ProblemInstance make_instance(DiscreteMeasure P, DiscreteMeasure Q, const CostSpec& spec,
                              double eps,
                              std::optional<GeometryConstants> geometry = {});

// Concave dual objective
//   sum_i p_i f_i + sum_j q_j g_j
//     - 1/(2 eps) sum_ij p_i q_j ((f_i + g_j - C_ij)_+)^2.
double gamma_objective(const ProblemInstance& inst, const DualPotentials& pot);

// Ascent direction (u, v):
//   u_i = 1 - 1/eps sum_j q_j (f_i + g_j - C_ij)_+,  v_j symmetric.
std::pair<Vector, Vector> gamma_gradient(const ProblemInstance& inst,
                                         const DualPotentials& pot);

// Norm of a (u, v) block pair in L2(P) x L2(Q).
double gradient_l2_norm(const ProblemInstance& inst, const Vector& u, const Vector& v);

// Squared gradient norm of the objective restricted to the mean-zero gauge:
// ||grad||^2 - I0^2 with I0 the P(x)Q-mean of the integrand above. Clamped
// to 0 (the exact value is nonnegative; only float noise in [-1e-12, 0) is
// tolerated).
double phi_gradient_norm_sq(const ProblemInstance& inst, const DualPotentials& pot);

// Candidate coupling pi_ij = p_i q_j (f_i + g_j - C_ij)_+ / eps, positive
// entries only.
Coupling primal_from_dual(const ProblemInstance& inst, const DualPotentials& pot);

// (max_i |row_i - p_i|, max_j |col_j - q_j|).
std::pair<double, double> marginal_residual(const ProblemInstance& inst,
                                            const Coupling& pi);

// sum_ij C_ij pi_ij + eps/2 sum_ij pi_ij^2 / (p_i q_j).
double primal_objective(const ProblemInstance& inst, const Coupling& pi);

struct DualityGap {
    double value;          // +inf when the candidate coupling is infeasible
    bool feasible;
};

DualityGap duality_gap(const ProblemInstance& inst, const DualPotentials& pot,
                       double feas_tol = 1e-8);

// eps * sup-norm of the gradient blocks: max deviation of the first-order
// conditions  sum_j q_j (f_i + g_j - C_ij)_+ = eps  (and the mirrored one).
double foc_residual(const ProblemInstance& inst, const DualPotentials& pot);

// sup_ij |(fA_i + gA_j) - (fB_i + gB_j)| in O(n + m).
double oplus_sup_distance(const DualPotentials& a, const DualPotentials& b);

// L2(P(x)Q) distance of the same difference, via the variance/mean split:
// E_P[df^2] + E_Q[dg^2] + 2 E_P[df] E_Q[dg], in O(n + m).
double oplus_l2_distance(const ProblemInstance& inst, const DualPotentials& a,
                         const DualPotentials& b);

// Segment from pot_star (t = 0) to pot (t = 1).
DualPotentials phi_path(const DualPotentials& pot_star, const DualPotentials& pot,
                        double t);

struct PhiDerivatives {
    double phi;         // -objective at the path point
    double phi_prime;
    double phi_second;  // second derivative; indicator is the closed set {>=}
};

PhiDerivatives phi_derivatives(const ProblemInstance& inst, const DualPotentials& pot_star,
                               const DualPotentials& pot, double t);

}  // namespace qot
