#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qot/oracle.hpp"
#include "qot/solvers.hpp"
#include "qot/spectral.hpp"

namespace qot {

struct VerifyOptions {
    double grad_tol = 1e-10;
    int max_iters = 200000;
    double reference_grad_tol = 1e-12;
    double reference_cert_tol = 1e-8;
    double pl_slack = 1e-9;        // ratios must be >= 1 - pl_slack
    double gap_floor = 1e-13;      // iterates below this gap are skipped
    double rate_slack = 1e-12;     // additive slack on the contraction bound
    double iterate_slack = 1e-10;  // additive slack on the sup-norm chains
    bool check_pl = true;
    bool check_error_bound = true;
    bool check_rate = true;
    bool check_iterate_bounds = true;
    bool check_coercivity = true;
    // Certify and use this instead of solving for the reference.
    std::optional<DualPotentials> external_reference;
};

struct CheckOutcome {
    std::string name;
    bool enabled = true;
    bool pass = true;
    double worst = 0.0;  // most adverse margin seen (meaning depends on check)
    std::string note;
};

struct VerificationReport {
    std::vector<CheckOutcome> checks;
    bool all_pass = false;
    KktCertificate reference_cert;
    DualPotentials reference;
    double reference_objective = 0.0;
    double theoretical_q = 0.0;
    // Best gradient-dominance constant actually observed on the trace:
    // max over iterates of gap / (max(C, eps) * ||grad||^2). Pessimism of
    // the certified gamma_eps is gamma_eps / this.
    double empirical_gamma = 0.0;
    SolveResult run;
    std::optional<CoercivityCertificate> coercivity;
};

// Runs the configured algorithm against a certified reference and checks
// every enabled inequality along the trace. The start pair supplies g for
// coordinate ascent and (f, g) for the gradient methods. Unsafe step sizes
// disable the rate and iterate-bound checks (their proofs assume admissible
// steps); the dominance/error-bound checks stay on.
VerificationReport verify_run(const ProblemInstance& inst, const SolverConfig& config,
                              const DualPotentials& start, const PLConstants& consts,
                              const VerifyOptions& options = {});

}  // namespace qot
