#pragma once

#include <vector>

#include "qot/constants.hpp"
#include "qot/dual_core.hpp"

namespace qot {

// Closed superlevel sections {(i,j) : f_r(i) + g_r(j) >= C_ij} along the
// interpolation path from pot_star (r = 0) to pot (r = 1), with their
// marginal masses.
struct SectionSets {
    IndicatorMatrix indicator;  // n x m
    Vector row_masses;          // Q-mass of each row section
    Vector col_masses;          // P-mass of each column section
};

SectionSets build_sections(const ProblemInstance& inst, const DualPotentials& pot_star,
                           const DualPotentials& pot, double r);

// Self-adjoint contraction on the mean-zero quotient of oplus pairs whose
// quadratic form is the section-restricted second moment:
//   <u (+) v, M(u (+) v)> = sum_{(i,j) in sections} p_i q_j (u_i + v_j)^2.
struct CoercivityOperator {
    SectionSets sections;
    Vector p;
    Vector q;
};

CoercivityOperator make_coercivity_operator(const ProblemInstance& inst,
                                            const SectionSets& sections);

// Image blocks (M1, M2) of the pair (u, v).
std::pair<Vector, Vector> apply_coercivity(const CoercivityOperator& op, const Vector& u,
                                           const Vector& v);

// <u (+) v, utilde (+) vtilde> in the oplus geometry over P (x) Q.
double oplus_inner(const Vector& p, const Vector& q, const Vector& u, const Vector& v,
                   const Vector& ut, const Vector& vt);

struct MinEigenResult {
    double lambda0;
    Vector u;
    Vector v;
};

// Smallest generalized eigenvalue of the operator's quadratic form against
// the oplus Gram form, after deflating the shift direction (1, -1).
MinEigenResult min_eigenvalue(const CoercivityOperator& op);

struct CertificateSample {
    double r = 0.0;
    double lambda0 = 0.0;
    bool pass = false;            // lambda0 >= beta_eps
    double phi_second = 0.0;
    bool phi_bound_pass = false;  // ||oplus diff||^2 <= (eps/beta) phi''(r)
};

struct CoercivityCertificate {
    double r0 = 0.0;
    double beta_eps = 0.0;
    std::vector<CertificateSample> samples;
    double min_lambda0 = 0.0;
    double min_margin = 0.0;  // min over samples of lambda0 - beta_eps
    bool all_pass = false;
};

// Evaluates the spectral lower bound at each r in r_samples (all must lie in
// [0, r0]); empty r_samples selects {0, r0/4, r0/2, 3 r0/4, r0}.
CoercivityCertificate coercivity_certificate(const ProblemInstance& inst,
                                             const DualPotentials& pot_star,
                                             const DualPotentials& pot,
                                             const PLConstants& consts,
                                             std::vector<double> r_samples = {});

}  // namespace qot
