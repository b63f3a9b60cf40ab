#include "qot/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qot/errors.hpp"

namespace qot {

namespace {

constexpr double kGapFloor = 1e-14;  // below this the pl ratio is meaningless

struct TraceContext {
    const ProblemInstance* inst;
    const SolverConfig* config;
    std::optional<double> ref_objective;

    explicit TraceContext(const ProblemInstance& instance, const SolverConfig& cfg)
        : inst(&instance), config(&cfg) {
        if (cfg.reference) ref_objective = gamma_objective(instance, *cfg.reference);
    }

    TraceRow row(int iter, const DualPotentials& pot, double objective,
                 double grad_l2) const {
        TraceRow r;
        r.iter = iter;
        r.objective = objective;
        r.grad_l2 = grad_l2;
        if (config->reference) {
            const double gap = *ref_objective - objective;
            r.gap = gap;
            r.sup_dist = oplus_sup_distance(pot, *config->reference);
            r.l2_dist = oplus_l2_distance(*inst, pot, *config->reference);
            if (config->gamma_eps) {
                if (gap < kGapFloor) {
                    r.pl_ratio = std::numeric_limits<double>::infinity();
                } else {
                    r.pl_ratio = grad_l2 * grad_l2 * (*config->gamma_eps) *
                                 std::max(*r.sup_dist, inst->eps) / gap;
                }
            }
        }
        return r;
    }
};

double resolve_grad_tol(const SolverConfig& config, double start_objective) {
    if (config.grad_tol >= 0.0) return config.grad_tol;
    return 1e-10 * std::max(1.0, std::abs(start_objective));
}

void require_finite(const DualPotentials& pot) {
    if (!pot.f.allFinite() || !pot.g.allFinite()) throw NonFiniteIterate();
}

double validated_step(const SolverConfig& config, double upper) {
    if (!config.step_size) throw StepSizeOutOfRange("step size required");
    const double eta = *config.step_size;
    if (!(eta > 0.0) || !std::isfinite(eta)) throw StepSizeOutOfRange("step must be positive");
    if (!config.unsafe_step && !(eta < upper))
        throw StepSizeOutOfRange("step outside the admissible range (0, " +
                                 std::to_string(upper) + ")");
    return eta;
}

// Shift-minimal sup distance between two g blocks: inf_a ||dg + a||_inf.
double aligned_g_distance(const Vector& g0, const Vector& g_star) {
    const Vector dg = g0 - g_star;
    return 0.5 * (dg.maxCoeff() - dg.minCoeff());
}

}  // namespace

double solve_1d_foc(const Vector& breakpoints, const Vector& weights, double eps) {
    const Eigen::Index m = breakpoints.size();
    if (weights.size() != m) throw LengthMismatch("breakpoints vs weights");
    if (m == 0) throw ZeroWeights("empty breakpoint list");
    if (!(eps > 0.0)) throw Error("eps must be positive");
    double total = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        if (!(weights[j] >= 0.0)) throw NegativeWeight();
        total += weights[j];
    }
    if (!(total > 0.0)) throw ZeroWeights();

    std::vector<int> ord(static_cast<size_t>(m));
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(),
              [&](int a, int b) { return breakpoints[a] < breakpoints[b]; });

    // On [b_(k), b_(k+1)) the map is t -> W t - S; its root is exact.
    double W = 0.0, S = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        const int idx = ord[static_cast<size_t>(k)];
        W += weights[idx];
        S += weights[idx] * breakpoints[idx];
        if (W <= 0.0) continue;
        const double cand = (eps + S) / W;
        if (k + 1 == m || cand <= breakpoints[ord[static_cast<size_t>(k + 1)]]) return cand;
    }
    throw Error("unreachable: the last linear piece always brackets the root");
}

SolveResult gradient_ascent_run(const ProblemInstance& inst, const DualPotentials& pot0,
                                const SolverConfig& config) {
    const double eta = validated_step(config, inst.eps);
    TraceContext tracer(inst, config);

    DualPotentials pot = pot0;
    require_finite(pot);
    SolveResult out;
    double tol = -1.0;
    for (int iter = 0; iter <= config.max_iters; ++iter) {
        auto [u, v] = gamma_gradient(inst, pot);
        const double grad = gradient_l2_norm(inst, u, v);
        const double obj = gamma_objective(inst, pot);
        if (tol < 0.0) tol = resolve_grad_tol(config, obj);
        if (config.record_trace) out.trace.rows.push_back(tracer.row(iter, pot, obj, grad));
        if (config.keep_iterates) out.iterates.push_back(pot);
        out.iterations = iter;
        out.final_grad_l2 = grad;
        if (grad <= tol) {
            out.converged = true;
            break;
        }
        if (iter == config.max_iters) break;
        pot.f += eta * u;
        pot.g += eta * v;
        require_finite(pot);
    }
    out.potentials = std::move(pot);
    return out;
}

SolveResult coordinate_ascent_run(const ProblemInstance& inst, const Vector& g0,
                                  const SolverConfig& config) {
    if (g0.size() != inst.m()) throw LengthMismatch("g0 length vs Q support");
    if (!g0.allFinite()) throw NonFiniteIterate();
    TraceContext tracer(inst, config);

    const int n = inst.n(), m = inst.m();
    DualPotentials pot{Vector::Zero(n), g0};
    SolveResult out;
    double tol = -1.0;
    Vector b(m), bg(n);
    for (int iter = 0; iter <= config.max_iters; ++iter) {
        // f_iter: exact row-wise maximizer against the current g.
        for (int i = 0; i < n; ++i) {
            b = inst.cost.row(i).transpose() - pot.g;
            pot.f[i] = solve_1d_foc(b, inst.Q.weights, inst.eps);
        }
        require_finite(pot);
        auto [u, v] = gamma_gradient(inst, pot);
        const double grad = gradient_l2_norm(inst, u, v);
        const double obj = gamma_objective(inst, pot);
        if (tol < 0.0) tol = resolve_grad_tol(config, obj);
        if (config.record_trace) out.trace.rows.push_back(tracer.row(iter, pot, obj, grad));
        if (config.keep_iterates) out.iterates.push_back(pot);
        out.iterations = iter;
        out.final_grad_l2 = grad;
        if (grad <= tol) {
            out.converged = true;
            break;
        }
        if (iter == config.max_iters) break;
        // g_{iter+1}: exact column-wise maximizer against f_iter.
        for (int j = 0; j < m; ++j) {
            bg = inst.cost.col(j) - pot.f;
            pot.g[j] = solve_1d_foc(bg, inst.P.weights, inst.eps);
        }
        require_finite(pot);
    }
    out.potentials = std::move(pot);
    return out;
}

SolveResult coordinate_gradient_ascent_run(const ProblemInstance& inst,
                                           const DualPotentials& pot0,
                                           const SolverConfig& config) {
    const double eta = validated_step(config, inst.eps / std::sqrt(2.0));
    TraceContext tracer(inst, config);

    DualPotentials pot = pot0;
    require_finite(pot);
    SolveResult out;
    double tol = -1.0;
    for (int iter = 0; iter <= config.max_iters; ++iter) {
        auto [u, v] = gamma_gradient(inst, pot);
        const double grad = gradient_l2_norm(inst, u, v);
        const double obj = gamma_objective(inst, pot);
        if (tol < 0.0) tol = resolve_grad_tol(config, obj);
        if (config.record_trace) out.trace.rows.push_back(tracer.row(iter, pot, obj, grad));
        if (config.keep_iterates) out.iterates.push_back(pot);
        out.iterations = iter;
        out.final_grad_l2 = grad;
        if (grad <= tol) {
            out.converged = true;
            break;
        }
        if (iter == config.max_iters) break;
        pot.f += eta * u;
        // The g block uses the gradient at the already-updated f.
        auto [u2, v2] = gamma_gradient(inst, pot);
        (void)u2;
        pot.g += eta * v2;
        require_finite(pot);
    }
    out.potentials = std::move(pot);
    return out;
}

RateBound theoretical_rate(const ProblemInstance& inst, const SolverConfig& config,
                           const DualPotentials& start, double gamma_eps) {
    if (!config.reference) throw MissingReference();
    if (!(gamma_eps > 0.0)) throw MissingGeometry("gamma_eps must be positive");
    const double eps = inst.eps;
    const DualPotentials& ref = *config.reference;

    double q = 0.0, pref = 0.0;
    switch (config.algorithm) {
        case Algorithm::GradientAscent: {
            const double eta = validated_step(config, eps);
            const double M = std::max(2.0 * oplus_sup_distance(start, ref), eps);
            const double denom = eta * (1.0 - eta / eps);
            q = denom / (gamma_eps * M);
            pref = gamma_eps * gamma_eps * M * M / denom;
            break;
        }
        case Algorithm::CoordinateAscent: {
            const double M = std::max(2.0 * aligned_g_distance(start.g, ref.g), eps);
            q = eps / (2.0 * gamma_eps * M);
            pref = 2.0 * gamma_eps * gamma_eps * M * M / eps;
            break;
        }
        case Algorithm::CoordinateGradientAscent: {
            const double eta = validated_step(config, eps / std::sqrt(2.0));
            const double M = std::max(2.0 * oplus_sup_distance(start, ref), eps);
            const double denom = eta * (1.0 - eta / (2.0 * eps));
            q = denom / (2.0 * gamma_eps * M);
            pref = 2.0 * gamma_eps * gamma_eps * M * M / denom;
            break;
        }
    }
    return {q, pref};
}

double default_step_size(const ProblemInstance& inst, Algorithm /*algorithm*/) {
    return 0.5 * inst.eps;
}

double empirical_contraction(const ConvergenceTrace& trace, double tail_fraction,
                             int min_tail) {
    std::vector<double> ratios;
    for (size_t k = 0; k + 1 < trace.rows.size(); ++k) {
        const auto& a = trace.rows[k].gap;
        const auto& b = trace.rows[k + 1].gap;
        if (!a || !b || *a <= 1e-14 || *b <= 1e-14) continue;
        ratios.push_back(*b / *a);
    }
    if (ratios.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto want = static_cast<size_t>(
        std::max<double>(min_tail, std::ceil(tail_fraction * static_cast<double>(ratios.size()))));
    const size_t take = std::min(want, ratios.size());
    double log_sum = 0.0;
    for (size_t k = ratios.size() - take; k < ratios.size(); ++k)
        log_sum += std::log(ratios[k]);
    return std::exp(log_sum / static_cast<double>(take));
}

}  // namespace qot
