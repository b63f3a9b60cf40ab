#pragma once

#include <optional>
#include <vector>

#include "qot/dual_core.hpp"

namespace qot {

enum class Algorithm { GradientAscent, CoordinateAscent, CoordinateGradientAscent };

struct SolverConfig {
    Algorithm algorithm = Algorithm::GradientAscent;
    // Required for the two gradient methods; admissible ranges (0, eps) and
    // (0, eps/sqrt(2)) respectively. unsafe_step bypasses the range check.
    std::optional<double> step_size;
    int max_iters = 100000;
    // Negative means auto: 1e-10 * max(1, |objective at the start|).
    double grad_tol = -1.0;
    bool record_trace = true;
    bool keep_iterates = false;
    bool unsafe_step = false;
    // Enable the distance/gap/ratio trace columns.
    std::optional<DualPotentials> reference;
    std::optional<double> gamma_eps;
};

struct TraceRow {
    int iter = 0;
    double objective = 0.0;
    double grad_l2 = 0.0;
    std::optional<double> gap;          // reference objective minus objective
    std::optional<double> sup_dist;     // oplus sup distance to reference
    std::optional<double> l2_dist;      // oplus L2(P(x)Q) distance to reference
    std::optional<double> pl_ratio;     // gamma * max(sup_dist, eps) * grad^2 / gap
};

struct ConvergenceTrace {
    std::vector<TraceRow> rows;
};

struct SolveResult {
    DualPotentials potentials;
    ConvergenceTrace trace;
    bool converged = false;
    int iterations = 0;  // index of the last recorded iterate
    double final_grad_l2 = 0.0;
    // Populated when config.keep_iterates; iterates[k] pairs with trace row k.
    std::vector<DualPotentials> iterates;
};

// Root t of sum_j w_j (t - b_j)_+ = eps for nonnegative weights with
// positive total. Exact sort-and-sweep over the linear pieces.
double solve_1d_foc(const Vector& breakpoints, const Vector& weights, double eps);

// Simultaneous ascent  (f, g) += eta * grad.
SolveResult gradient_ascent_run(const ProblemInstance& inst, const DualPotentials& pot0,
                                const SolverConfig& config);

// Exact alternating maximization. One iteration is the pair
// (f-solve against g_n, then g-solve against that f); the trace row for n
// is taken at (f_n, g_n), right after the f-solve.
SolveResult coordinate_ascent_run(const ProblemInstance& inst, const Vector& g0,
                                  const SolverConfig& config);

// Block gradient ascent: f-step with the gradient at (f_n, g_n), then
// g-step with the gradient re-evaluated at (f_{n+1}, g_n).
SolveResult coordinate_gradient_ascent_run(const ProblemInstance& inst,
                                           const DualPotentials& pot0,
                                           const SolverConfig& config);

struct RateBound {
    double q;              // per-iteration contraction of the suboptimality gap
    double l2_prefactor;   // constant in  ||oplus error||^2 <= prefactor * gap0 * (1-q)^n
};

// Certified linear rate for the configured algorithm from the given start.
// Requires config.reference and the PL constant gamma_eps. For coordinate
// ascent the start distance is inf over shifts a of ||g0 - g* + a||_inf.
RateBound theoretical_rate(const ProblemInstance& inst, const SolverConfig& config,
                           const DualPotentials& start, double gamma_eps);

// Midpoint eps/2 of the admissible gradient-ascent range, also inside the
// block-gradient range (0, eps/sqrt(2)). Coordinate ascent takes no step
// size; the value is returned for uniformity and ignored there.
double default_step_size(const ProblemInstance& inst, Algorithm algorithm);

// Geometric mean of consecutive gap ratios gap_{k+1}/gap_k over the trace
// tail (the last tail_fraction of the ratios, at least min_tail of them).
// Pairs with a gap at or below 1e-14 are skipped; NaN when no ratio remains.
double empirical_contraction(const ConvergenceTrace& trace, double tail_fraction = 0.25,
                             int min_tail = 10);

}  // namespace qot
