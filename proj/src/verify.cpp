#include "qot/verify.hpp"

#include <cmath>
#include <limits>

#include "qot/errors.hpp"

namespace qot {

namespace {

double sup_norm(const Vector& x) { return x.cwiseAbs().maxCoeff(); }

}  // namespace

VerificationReport verify_run(const ProblemInstance& inst, const SolverConfig& config,
                              const DualPotentials& start, const PLConstants& consts,
                              const VerifyOptions& options) {
    VerificationReport report;

    // Reference potentials: exact coordinate ascent unless supplied.
    if (options.external_reference) {
        report.reference = *options.external_reference;
    } else {
        SolverConfig ref_cfg;
        ref_cfg.algorithm = Algorithm::CoordinateAscent;
        ref_cfg.grad_tol = options.reference_grad_tol;
        ref_cfg.max_iters = options.max_iters;
        ref_cfg.record_trace = false;
        report.reference =
            coordinate_ascent_run(inst, Vector::Zero(inst.m()), ref_cfg).potentials;
    }
    report.reference_cert = kkt_certificate(inst, report.reference, options.reference_cert_tol);
    report.reference_objective = gamma_objective(inst, report.reference);
    {
        CheckOutcome c;
        c.name = "reference_certified";
        c.pass = report.reference_cert.pass;
        c.worst = report.reference_cert.foc;
        if (!c.pass) c.note = "reference potentials fail their first-order certificate";
        report.checks.push_back(c);
        if (!c.pass) {
            report.all_pass = false;
            return report;
        }
    }

    // Checked run, with full iterate retention.
    SolverConfig run_cfg = config;
    run_cfg.record_trace = true;
    run_cfg.keep_iterates = true;
    run_cfg.reference = report.reference;
    run_cfg.gamma_eps = consts.gamma_eps;
    if (run_cfg.grad_tol < 0.0) run_cfg.grad_tol = options.grad_tol;

    switch (config.algorithm) {
        case Algorithm::GradientAscent:
            report.run = gradient_ascent_run(inst, start, run_cfg);
            break;
        case Algorithm::CoordinateAscent:
            report.run = coordinate_ascent_run(inst, start.g, run_cfg);
            break;
        case Algorithm::CoordinateGradientAscent:
            report.run = coordinate_gradient_ascent_run(inst, start, run_cfg);
            break;
    }
    const auto& rows = report.run.trace.rows;
    const auto& iterates = report.run.iterates;

    // Gradient dominance and error bound along the trace.
    {
        CheckOutcome pl, eb;
        pl.name = "pl_ratio";
        eb.name = "error_bound_ratio";
        pl.enabled = options.check_pl;
        eb.enabled = options.check_error_bound;
        double worst_pl = std::numeric_limits<double>::infinity();
        double worst_eb = std::numeric_limits<double>::infinity();
        double best_gamma = 0.0;
        for (const auto& r : rows) {
            if (!r.gap || *r.gap <= options.gap_floor) continue;
            if (r.pl_ratio) worst_pl = std::min(worst_pl, *r.pl_ratio);
            const double denom = std::max(*r.sup_dist, inst.eps) * r.grad_l2 * r.grad_l2;
            if (denom > 0.0) best_gamma = std::max(best_gamma, *r.gap / denom);
            if (*r.l2_dist > options.gap_floor) {
                const double ratio = consts.gamma_eps * std::max(*r.sup_dist, inst.eps) *
                                     r.grad_l2 / *r.l2_dist;
                worst_eb = std::min(worst_eb, ratio);
            }
        }
        pl.worst = worst_pl;
        eb.worst = worst_eb;
        pl.pass = !pl.enabled || worst_pl >= 1.0 - options.pl_slack;
        eb.pass = !eb.enabled || worst_eb >= 1.0 - options.pl_slack;
        report.empirical_gamma = best_gamma;
        report.checks.push_back(pl);
        report.checks.push_back(eb);
    }

    // Linear rate of the suboptimality gap plus the derived L2 display.
    {
        CheckOutcome rate;
        rate.name = "rate_bound";
        rate.enabled = options.check_rate && !config.unsafe_step;
        if (config.unsafe_step) rate.note = "skipped: step outside the certified range";
        if (rate.enabled && !rows.empty()) {
            SolverConfig rate_cfg = run_cfg;
            const RateBound rb =
                theoretical_rate(inst, rate_cfg, iterates.front(), consts.gamma_eps);
            report.theoretical_q = rb.q;
            const double gap0 = rows.front().gap.value_or(0.0);
            double worst = -std::numeric_limits<double>::infinity();
            bool ok = true;
            for (size_t k = 0; k < rows.size(); ++k) {
                const double bound =
                    gap0 * std::pow(1.0 - rb.q, static_cast<double>(k)) + options.rate_slack;
                const double excess = rows[k].gap.value_or(0.0) - bound;
                worst = std::max(worst, excess);
                if (excess > 0.0) ok = false;
                const double l2 = rows[k].l2_dist.value_or(0.0);
                const double l2_bound = rb.l2_prefactor * gap0 *
                                            std::pow(1.0 - rb.q, static_cast<double>(k)) +
                                        options.rate_slack;
                if (l2 * l2 > l2_bound) {
                    ok = false;
                    worst = std::max(worst, l2 * l2 - l2_bound);
                }
            }
            rate.worst = worst;
            rate.pass = ok;
        }
        report.checks.push_back(rate);
    }

    // Sup-norm iterate control, shape depending on the algorithm.
    {
        CheckOutcome ib;
        ib.name = "iterate_bounds";
        ib.enabled = options.check_iterate_bounds && !config.unsafe_step;
        if (config.unsafe_step) ib.note = "skipped: step outside the certified range";
        if (ib.enabled && !iterates.empty()) {
            bool ok = true;
            double worst = -std::numeric_limits<double>::infinity();
            switch (config.algorithm) {
                case Algorithm::GradientAscent: {
                    const double d0 = rows.front().sup_dist.value_or(0.0);
                    for (const auto& r : rows) {
                        const double excess =
                            r.sup_dist.value_or(0.0) - (2.0 * d0 + options.iterate_slack);
                        worst = std::max(worst, excess);
                        if (excess > 0.0) ok = false;
                    }
                    break;
                }
                case Algorithm::CoordinateAscent: {
                    // Fix the gauge that minimizes the initial g distance,
                    // then require the alternating chain to contract.
                    const Vector dg0 = iterates.front().g - report.reference.g;
                    const double shift = -0.5 * (dg0.maxCoeff() + dg0.minCoeff());
                    const Vector f_star = report.reference.f.array() - shift;
                    const Vector g_star = report.reference.g.array() + shift;
                    for (size_t k = 0; k < iterates.size(); ++k) {
                        const double fdist = sup_norm(iterates[k].f - f_star);
                        const double gdist = sup_norm(iterates[k].g - g_star);
                        double excess = fdist - (gdist + options.iterate_slack);
                        worst = std::max(worst, excess);
                        if (excess > 0.0) ok = false;
                        if (k + 1 < iterates.size()) {
                            const double gnext = sup_norm(iterates[k + 1].g - g_star);
                            excess = gnext - (fdist + options.iterate_slack);
                            worst = std::max(worst, excess);
                            if (excess > 0.0) ok = false;
                        }
                    }
                    break;
                }
                case Algorithm::CoordinateGradientAscent: {
                    double prev = std::numeric_limits<double>::infinity();
                    for (const auto& it : iterates) {
                        const double cur = std::max(sup_norm(it.f - report.reference.f),
                                                    sup_norm(it.g - report.reference.g));
                        const double excess = cur - (prev + options.iterate_slack);
                        worst = std::max(worst, excess);
                        if (excess > 0.0) ok = false;
                        prev = cur;
                    }
                    break;
                }
            }
            ib.worst = worst;
            ib.pass = ok;
        }
        report.checks.push_back(ib);
    }

    // Spectral certificate at the start of the run.
    {
        CheckOutcome co;
        co.name = "coercivity_certificate";
        co.enabled = options.check_coercivity;
        if (co.enabled && !iterates.empty()) {
            report.coercivity =
                coercivity_certificate(inst, report.reference, iterates.front(), consts);
            co.pass = report.coercivity->all_pass;
            co.worst = report.coercivity->min_margin;
        }
        report.checks.push_back(co);
    }

    report.all_pass = true;
    for (const auto& c : report.checks)
        if (c.enabled && !c.pass) report.all_pass = false;
    return report;
}

}  // namespace qot
