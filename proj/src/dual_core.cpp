#include "qot/dual_core.hpp"

#include <cmath>
#include <limits>

#include "qot/errors.hpp"

namespace qot {

namespace {

void check_shapes(const ProblemInstance& inst, const DualPotentials& pot) {
    if (pot.f.size() != inst.n() || pot.g.size() != inst.m())
        throw LengthMismatch("potential lengths vs supports");
}

}  // namespace

ProblemInstance make_instance(DiscreteMeasure P, DiscreteMeasure Q, const CostSpec& spec,
                              double eps, std::optional<GeometryConstants> geometry) {
    if (!(eps > 0.0)) throw Error("eps must be positive");
    ProblemInstance inst;
    inst.cost = build_cost_matrix(spec, P, Q);
    if (geometry) {
        inst.geometry = *geometry;
    } else {
        inst.geometry = empirical_geometry(P, Q);
    }
    if (inst.geometry.lipschitz_L == 0.0)
        inst.geometry.lipschitz_L = lipschitz_constant(spec, P, Q).value;
    if (!inst.geometry.ball_inf_fn) {
        DiscreteMeasure Qcopy = Q;
        inst.geometry.ball_inf_fn = [Qcopy](double r) { return ball_measure_inf(Qcopy, r); };
    }
    if (inst.geometry.diam_Omega == 0.0) inst.geometry.diam_Omega = diameter(P);
    inst.P = std::move(P);
    inst.Q = std::move(Q);
    inst.eps = eps;
    return inst;
}

double gamma_objective(const ProblemInstance& inst, const DualPotentials& pot) {
    check_shapes(inst, pot);
    const int n = inst.n(), m = inst.m();
    double penalty = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < m; ++j) {
            const double s = pot.f[i] + pot.g[j] - inst.cost(i, j);
            if (s > 0.0) row += inst.Q.weights[j] * s * s;
        }
        penalty += inst.P.weights[i] * row;
    }
    return inst.P.weights.dot(pot.f) + inst.Q.weights.dot(pot.g) -
           penalty / (2.0 * inst.eps);
}

std::pair<Vector, Vector> gamma_gradient(const ProblemInstance& inst,
                                         const DualPotentials& pot) {
    check_shapes(inst, pot);
    const int n = inst.n(), m = inst.m();
    Vector u(n), v = Vector::Zero(m);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
            const double s = pot.f[i] + pot.g[j] - inst.cost(i, j);
            if (s > 0.0) {
                acc += inst.Q.weights[j] * s;
                v[j] += inst.P.weights[i] * s;
            }
        }
        u[i] = 1.0 - acc / inst.eps;
    }
    for (int j = 0; j < m; ++j) v[j] = 1.0 - v[j] / inst.eps;
    return {std::move(u), std::move(v)};
}

double gradient_l2_norm(const ProblemInstance& inst, const Vector& u, const Vector& v) {
    return std::sqrt(inst.P.weights.dot(u.cwiseProduct(u)) +
                     inst.Q.weights.dot(v.cwiseProduct(v)));
}

double phi_gradient_norm_sq(const ProblemInstance& inst, const DualPotentials& pot) {
    auto [u, v] = gamma_gradient(inst, pot);
    const double norm_sq = inst.P.weights.dot(u.cwiseProduct(u)) +
                           inst.Q.weights.dot(v.cwiseProduct(v));
    const double i0 = inst.P.weights.dot(u);  // equals the Q-side mean by Fubini
    const double val = norm_sq - i0 * i0;
    if (val < -1e-12) throw Error("mean-zero gradient split produced a negative square");
    return std::max(val, 0.0);
}

Coupling primal_from_dual(const ProblemInstance& inst, const DualPotentials& pot) {
    check_shapes(inst, pot);
    Coupling pi;
    pi.n = inst.n();
    pi.m = inst.m();
    for (int i = 0; i < pi.n; ++i)
        for (int j = 0; j < pi.m; ++j) {
            const double s = pot.f[i] + pot.g[j] - inst.cost(i, j);
            if (s > 0.0) {
                const double mass =
                    inst.P.weights[i] * inst.Q.weights[j] * s / inst.eps;
                if (mass > 0.0) pi.entries.push_back({i, j, mass});
            }
        }
    return pi;
}

std::pair<double, double> marginal_residual(const ProblemInstance& inst,
                                            const Coupling& pi) {
    Vector row = Vector::Zero(inst.n()), col = Vector::Zero(inst.m());
    for (const auto& e : pi.entries) {
        row[e.i] += e.mass;
        col[e.j] += e.mass;
    }
    return {(row - inst.P.weights).cwiseAbs().maxCoeff(),
            (col - inst.Q.weights).cwiseAbs().maxCoeff()};
}

double primal_objective(const ProblemInstance& inst, const Coupling& pi) {
    double lin = 0.0, quad = 0.0;
    for (const auto& e : pi.entries) {
        const double cell = inst.P.weights[e.i] * inst.Q.weights[e.j];
        if (cell == 0.0) {
            if (e.mass != 0.0) throw ZeroWeightCell();
            continue;
        }
        lin += inst.cost(e.i, e.j) * e.mass;
        quad += e.mass * e.mass / cell;
    }
    return lin + 0.5 * inst.eps * quad;
}

DualityGap duality_gap(const ProblemInstance& inst, const DualPotentials& pot,
                       double feas_tol) {
    const Coupling pi = primal_from_dual(inst, pot);
    const auto [row_res, col_res] = marginal_residual(inst, pi);
    if (row_res > feas_tol || col_res > feas_tol)
        return {std::numeric_limits<double>::infinity(), false};
    return {primal_objective(inst, pi) - gamma_objective(inst, pot), true};
}

double foc_residual(const ProblemInstance& inst, const DualPotentials& pot) {
    auto [u, v] = gamma_gradient(inst, pot);
    return inst.eps * std::max(u.cwiseAbs().maxCoeff(), v.cwiseAbs().maxCoeff());
}

double oplus_sup_distance(const DualPotentials& a, const DualPotentials& b) {
    if (a.f.size() != b.f.size() || a.g.size() != b.g.size())
        throw LengthMismatch("potential lengths");
    const Vector df = a.f - b.f, dg = a.g - b.g;
    return std::max(df.maxCoeff() + dg.maxCoeff(), -(df.minCoeff() + dg.minCoeff()));
}

double oplus_l2_distance(const ProblemInstance& inst, const DualPotentials& a,
                         const DualPotentials& b) {
    check_shapes(inst, a);
    check_shapes(inst, b);
    const Vector df = a.f - b.f, dg = a.g - b.g;
    const double mf = inst.P.weights.dot(df), mg = inst.Q.weights.dot(dg);
    const double sq = inst.P.weights.dot(df.cwiseProduct(df)) +
                      inst.Q.weights.dot(dg.cwiseProduct(dg)) + 2.0 * mf * mg;
    return std::sqrt(std::max(sq, 0.0));
}

DualPotentials phi_path(const DualPotentials& pot_star, const DualPotentials& pot,
                        double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw TOutOfRange();
    return {(1.0 - t) * pot_star.f + t * pot.f, (1.0 - t) * pot_star.g + t * pot.g};
}

PhiDerivatives phi_derivatives(const ProblemInstance& inst, const DualPotentials& pot_star,
                               const DualPotentials& pot, double t) {
    check_shapes(inst, pot_star);
    check_shapes(inst, pot);
    const DualPotentials at = phi_path(pot_star, pot, t);
    const Vector df = pot_star.f - pot.f, dg = pot_star.g - pot.g;

    PhiDerivatives out{};
    out.phi = -gamma_objective(inst, at);
    double first = 0.0, second = 0.0;
    for (int i = 0; i < inst.n(); ++i) {
        const double pi_w = inst.P.weights[i];
        for (int j = 0; j < inst.m(); ++j) {
            const double w = pi_w * inst.Q.weights[j];
            const double disp = df[i] + dg[j];
            const double s = at.f[i] + at.g[j] - inst.cost(i, j);
            first += w * disp * (1.0 - (s > 0.0 ? s : 0.0) / inst.eps);
            if (s >= 0.0) second += w * disp * disp;  // closed section set
        }
    }
    out.phi_prime = first;
    out.phi_second = second / inst.eps;
    return out;
}

}  // namespace qot
