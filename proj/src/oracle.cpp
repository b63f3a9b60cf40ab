#include "qot/oracle.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <tuple>

#include <json.hpp>

#include "qot/errors.hpp"

namespace qot {

namespace {

using nlohmann::json;

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct RestrictedQP {
    Matrix x;
    Vector mu;
    Vector nu;
};

// Minimizer of sum lin_ij x_ij + 1/2 sum H_ij x_ij^2 over {row sums = p,
// col sums = q, x = 0 on pinned cells}, H > 0 entrywise. Stationarity gives
// x_ij = (mu_i + nu_j - lin_ij) / H_ij on free cells; the multiplier system
// is rank-deficient by one joint shift per connected component of the
// free-cell graph, so the minimum-norm solve picks a representative. The
// caller keeps a mass-carrying free cell in every row and column, which
// keeps the system consistent.
RestrictedQP solve_restricted(const Matrix& H, const Matrix& lin, const Vector& p,
                              const Vector& q, const BoolMatrix& pinned) {
    const int n = static_cast<int>(H.rows()), m = static_cast<int>(H.cols());
    Matrix M = Matrix::Zero(n + m, n + m);
    Vector rhs(n + m);
    rhs.head(n) = p;
    rhs.tail(m) = q;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            if (pinned(i, j)) continue;
            const double inv = 1.0 / H(i, j);
            M(i, i) += inv;
            M(n + j, n + j) += inv;
            M(i, n + j) += inv;
            M(n + j, i) += inv;
            rhs[i] += lin(i, j) * inv;
            rhs[n + j] += lin(i, j) * inv;
        }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(M);
    const Vector uv = cod.solve(rhs);
    RestrictedQP out;
    out.mu = uv.head(n);
    out.nu = uv.tail(m);
    out.x = Matrix::Zero(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (!pinned(i, j)) out.x(i, j) = (out.mu[i] + out.nu[j] - lin(i, j)) / H(i, j);
    return out;
}

// Exact minimization of the same quadratic over the full transport polytope
// by primal active sets: walk from a feasible x toward the restricted
// minimizer, pin the first cell that blocks at zero, release pinned cells
// whose multiplier goes the wrong way. Terminates with the exact optimum at
// these sizes; the pivot cap only guards against degenerate cycling, and the
// returned x is feasible either way.
Matrix polytope_qp(const Matrix& H, const Matrix& lin, const Vector& p, const Vector& q,
                   Matrix x, int& pivots, int max_pivots) {
    const int n = static_cast<int>(H.rows()), m = static_cast<int>(H.cols());
    BoolMatrix pinned = BoolMatrix::Constant(n, m, false);
    for (pivots = 0; pivots < max_pivots; ++pivots) {
        const RestrictedQP r = solve_restricted(H, lin, p, q, pinned);

        double alpha = 1.0;
        int bi = -1, bj = -1;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                if (pinned(i, j) || r.x(i, j) >= 0.0) continue;
                const double drop = x(i, j) - r.x(i, j);
                const double a = drop > 0.0 ? x(i, j) / drop : 0.0;
                if (a < alpha) {
                    alpha = a;
                    bi = i;
                    bj = j;
                }
            }
        if (bi >= 0) {
            x = (x + alpha * (r.x - x)).cwiseMax(0.0);
            x(bi, bj) = 0.0;
            pinned(bi, bj) = true;
            continue;
        }

        x = r.x.cwiseMax(0.0);
        double worst = 1e-12;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                if (!pinned(i, j)) continue;
                const double viol = r.mu[i] + r.nu[j] - lin(i, j);
                if (viol > worst) {
                    worst = viol;
                    bi = i;
                    bj = j;
                }
            }
        if (bi < 0) break;
        pinned(bi, bj) = false;
    }
    return x;
}

double quad_objective(const ProblemInstance& inst, const Matrix& pi, const Matrix& invw) {
    return (inst.cost.array() * pi.array()).sum() +
           0.5 * inst.eps * (pi.array().square() * invw.array()).sum();
}

// Stationarity of the support multipliers: least-squares fit of
// grad_ij ~ u_i + v_j on the support, then the complementary checks.
double multiplier_residual(const Matrix& grad, const Matrix& pi, double support_tol) {
    const int n = static_cast<int>(pi.rows()), m = static_cast<int>(pi.cols());
    Matrix ATA = Matrix::Zero(n + m, n + m);
    Vector ATb = Vector::Zero(n + m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            if (pi(i, j) <= support_tol) continue;
            ATA(i, i) += 1.0;
            ATA(n + j, n + j) += 1.0;
            ATA(i, n + j) += 1.0;
            ATA(n + j, i) += 1.0;
            ATb[i] += grad(i, j);
            ATb[n + j] += grad(i, j);
        }
    ATA.diagonal().array() += 1e-12;  // pins the joint shift
    const Vector uv = ATA.ldlt().solve(ATb);
    double res = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const double fit = uv[i] + uv[n + j];
            if (pi(i, j) > support_tol)
                res = std::max(res, std::abs(grad(i, j) - fit));
            else
                res = std::max(res, std::max(fit - grad(i, j), 0.0));
        }
    return res;
}

json coupling_to_json(const OracleSolution& sol) {
    json entries = json::array();
    for (const auto& e : sol.coupling.entries)
        entries.push_back(json::array({e.i, e.j, e.mass}));
    return json{{"n", sol.coupling.n},
                {"m", sol.coupling.m},
                {"entries", entries},
                {"value", sol.value},
                {"kkt_residual", sol.kkt_residual},
                {"multiplier_residual", sol.multiplier_residual},
                {"iterations", sol.iterations},
                {"method", sol.method}};
}

OracleSolution coupling_from_json(const json& j) {
    OracleSolution sol;
    sol.coupling.n = j.at("n").get<int>();
    sol.coupling.m = j.at("m").get<int>();
    for (const auto& e : j.at("entries"))
        sol.coupling.entries.push_back(
            {e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
    sol.value = j.at("value").get<double>();
    sol.kkt_residual = j.at("kkt_residual").get<double>();
    sol.multiplier_residual = j.at("multiplier_residual").get<double>();
    sol.iterations = j.at("iterations").get<int>();
    sol.method = j.at("method").get<std::string>();
    return sol;
}

}  // namespace

OracleSolution solve_primal_small(const ProblemInstance& inst,
                                  double /*kkt_tol: acceptance is the caller's job*/,
                                  int max_iters) {
    const int n = inst.n(), m = inst.m();
    if (n * m > 64) throw InstanceTooLarge();
    if (std::abs(inst.P.weights.sum() - 1.0) > 1e-9 ||
        std::abs(inst.Q.weights.sum() - 1.0) > 1e-9)
        throw InfeasibleMarginals();

    const Vector& p = inst.P.weights;
    const Vector& q = inst.Q.weights;
    Matrix invw(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const double cell = p[i] * q[j];
            if (cell <= 0.0) throw ZeroWeightCell("oracle requires strictly positive weights");
            invw(i, j) = 1.0 / cell;
        }

    // Independent coupling is interior and feasible; pivot to the optimum.
    int pivots = 0;
    const Matrix H = inst.eps * invw;
    const Matrix pi = polytope_qp(H, inst.cost, p, q, p * q.transpose(), pivots, max_iters);

    // Certificate: fixed-point residual of the projected-gradient map at pi.
    // The projection restarts from the independent coupling, so a projection
    // that parrots its input cannot certify itself.
    const double tau = 1.0 / (inst.eps * invw.maxCoeff());
    OracleSolution sol;
    {
        const Matrix grad = inst.cost + inst.eps * pi.cwiseProduct(invw);
        const Matrix z = pi - tau * grad;
        int proj_pivots = 0;
        const Matrix target = polytope_qp(Matrix::Ones(n, m), -z, p, q,
                                          p * q.transpose(), proj_pivots, max_iters);
        sol.kkt_residual = (target - pi).cwiseAbs().maxCoeff() / tau;
    }
    sol.iterations = pivots;
    sol.value = quad_objective(inst, pi, invw);
    const Matrix grad = inst.cost + inst.eps * pi.cwiseProduct(invw);
    sol.multiplier_residual = multiplier_residual(grad, pi, 1e-10);
    sol.coupling.n = n;
    sol.coupling.m = m;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (pi(i, j) > 1e-13) sol.coupling.entries.push_back({i, j, pi(i, j)});
    return sol;
}

std::string instance_content_hash(const ProblemInstance& inst) {
    // FNV-1a over the raw bytes of every number that defines the instance.
    uint64_t h = 1469598103934665603ull;
    const auto mix = [&h](const void* data, size_t len) {
        const auto* b = static_cast<const unsigned char*>(data);
        for (size_t k = 0; k < len; ++k) {
            h ^= b[k];
            h *= 1099511628211ull;
        }
    };
    const auto mix_double = [&](double x) { mix(&x, sizeof(x)); };
    const auto mix_int = [&](int64_t x) { mix(&x, sizeof(x)); };

    mix_int(inst.n());
    mix_int(inst.m());
    mix_int(inst.P.dim());
    for (Eigen::Index i = 0; i < inst.P.points.rows(); ++i)
        for (Eigen::Index k = 0; k < inst.P.points.cols(); ++k)
            mix_double(inst.P.points(i, k));
    for (Eigen::Index i = 0; i < inst.P.weights.size(); ++i) mix_double(inst.P.weights[i]);
    for (Eigen::Index j = 0; j < inst.Q.points.rows(); ++j)
        for (Eigen::Index k = 0; k < inst.Q.points.cols(); ++k)
            mix_double(inst.Q.points(j, k));
    for (Eigen::Index j = 0; j < inst.Q.weights.size(); ++j) mix_double(inst.Q.weights[j]);
    for (Eigen::Index i = 0; i < inst.cost.rows(); ++i)
        for (Eigen::Index j = 0; j < inst.cost.cols(); ++j) mix_double(inst.cost(i, j));
    mix_double(inst.eps);

    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

OracleSolution solve_primal_small_cached(const ProblemInstance& inst,
                                         const std::string& cache_dir, double kkt_tol) {
    namespace fs = std::filesystem;
    const std::string key = instance_content_hash(inst);
    const fs::path path = fs::path(cache_dir) / ("oracle_" + key + ".json");
    if (fs::exists(path)) {
        std::ifstream in(path);
        json j;
        in >> j;
        OracleSolution sol = coupling_from_json(j);
        if (sol.kkt_residual <= kkt_tol) return sol;
    }
    OracleSolution sol = solve_primal_small(inst, kkt_tol);
    fs::create_directories(cache_dir);
    std::ofstream out(path);
    out << coupling_to_json(sol).dump(2) << "\n";
    return sol;
}

KktCertificate kkt_certificate(const ProblemInstance& inst, const DualPotentials& pot,
                               double tol) {
    KktCertificate cert;
    cert.objective = gamma_objective(inst, pot);
    cert.foc = foc_residual(inst, pot);
    const Coupling pi = primal_from_dual(inst, pot);
    std::tie(cert.row_residual, cert.col_residual) = marginal_residual(inst, pi);
    const DualityGap gap = duality_gap(inst, pot, tol);
    cert.gap = gap.value;
    cert.pass = cert.foc <= tol && cert.row_residual <= tol && cert.col_residual <= tol &&
                gap.feasible && std::abs(cert.gap) <= tol * (1.0 + std::abs(cert.objective));
    return cert;
}

}  // namespace qot
