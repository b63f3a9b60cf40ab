#pragma once

#include <string>

#include "qot/dual_core.hpp"

namespace qot {

// Ground-truth primal solve for desk-size instances. Deliberately built on
// the primal quadratic program only: no dual objective, no dual gradients,
// no shared code path with the solvers it is used to check.
struct OracleSolution {
    Coupling coupling;
    double value = 0.0;
    double kkt_residual = 0.0;        // projected-gradient fixed-point residual
    double multiplier_residual = 0.0; // support least-squares stationarity check
    int iterations = 0;               // active-set pivots
    std::string method = "active_set_qp";
};

// Minimizes sum C_ij pi_ij + eps/2 sum pi_ij^2 / (p_i q_j) over the
// transport polytope by a primal active-set method (exact restricted KKT
// solves, blocking steps, multiplier-sign releases), then reports the
// projected-gradient fixed-point residual at the result as its optimality
// certificate. kkt_tol is not a stopping knob here -- the solve is direct;
// callers judge the returned residual against it. max_iters caps the pivot
// count (a guard against degenerate cycling, orders of magnitude above any
// regular run). Requires n * m <= 64.
OracleSolution solve_primal_small(const ProblemInstance& inst, double kkt_tol = 1e-11,
                                  int max_iters = 20000);

// Cached variant: looks up / stores the solution as JSON in cache_dir, keyed
// by a content hash of (points, weights, cost, eps).
OracleSolution solve_primal_small_cached(const ProblemInstance& inst,
                                         const std::string& cache_dir,
                                         double kkt_tol = 1e-11);

std::string instance_content_hash(const ProblemInstance& inst);

struct KktCertificate {
    bool pass = false;
    double foc = 0.0;
    double row_residual = 0.0;
    double col_residual = 0.0;
    double gap = 0.0;
    double objective = 0.0;
};

// First-order certificate for a dual pair: FOC residual, marginal residuals
// of the induced coupling, and the duality gap, all within tol
// (gap scaled by 1 + |objective|).
KktCertificate kkt_certificate(const ProblemInstance& inst, const DualPotentials& pot,
                               double tol = 1e-8);

}  // namespace qot
