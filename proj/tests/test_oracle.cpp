#include <doctest.h>

#include <cctype>
#include <cmath>
#include <filesystem>

#include "fixtures.hpp"
#include "qot/errors.hpp"
#include "qot/oracle.hpp"
#include "qot/solvers.hpp"
#include "testutil.hpp"

using namespace qot;

namespace {

ProblemInstance weighted_pair(double eps) {
    Matrix pts(2, 1);
    pts << 0.0, 1.0;
    Vector p(2), q(2);
    p << 0.3, 0.7;
    q << 0.4, 0.6;
    CostSpec spec;
    spec.kind = CostKind::SquaredEuclidean;
    GeometryConstants geo = empirical_geometry(make_measure(pts, p), make_measure(pts, q),
                                               DensityBounds{0.3, 0.7}, 1.0);
    return make_instance(make_measure(pts, p), make_measure(pts, q), spec, eps, geo);
}

DualPotentials converged_reference(const ProblemInstance& inst) {
    SolverConfig config;
    config.algorithm = Algorithm::CoordinateAscent;
    config.grad_tol = 1e-13;
    config.record_trace = false;
    return coordinate_ascent_run(inst, Vector::Zero(inst.m()), config).potentials;
}

}  // namespace

TEST_CASE("quadratic programme on the two-point instance: interior optimum") {
    const ProblemInstance inst = fixtures::two_by_two(1.0);
    const OracleSolution sol = solve_primal_small(inst);

    CHECK(sol.kkt_residual <= 1e-11);
    CHECK(sol.multiplier_residual <= 1e-8);
    CHECK(sol.value == doctest::Approx(0.875).epsilon(1e-10));

    REQUIRE(sol.coupling.entries.size() == 4);
    const Matrix dense = sol.coupling.dense();
    CHECK(dense(0, 0) == doctest::Approx(0.375).epsilon(1e-9));
    CHECK(dense(1, 1) == doctest::Approx(0.375).epsilon(1e-9));
    CHECK(dense(0, 1) == doctest::Approx(0.125).epsilon(1e-9));
    CHECK(dense(1, 0) == doctest::Approx(0.125).epsilon(1e-9));

    const auto [row_res, col_res] = marginal_residual(inst, sol.coupling);
    CHECK(row_res <= 1e-12);
    CHECK(col_res <= 1e-12);
}

TEST_CASE("quadratic programme at small eps: the boundary kills the off-diagonal") {
    const ProblemInstance inst = fixtures::two_by_two(0.25);
    const OracleSolution sol = solve_primal_small(inst);

    // The scalar family J(t) = 1 - 2t + (t^2 + (1/2 - t)^2) over the diagonal
    // mass t caps at t = 1/2, so the optimal coupling has exactly two entries.
    REQUIRE(sol.coupling.entries.size() == 2);
    const Matrix dense = sol.coupling.dense();
    CHECK(dense(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(dense(1, 1) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.value == doctest::Approx(0.25).epsilon(1e-10));

    // Independent scalar minimization of the same family agrees.
    const double eps = inst.eps;
    const double t_star = testutil::ternary_min(
        [eps](double t) {
            return (1.0 - 2.0 * t) + 4.0 * eps * (t * t + (0.5 - t) * (0.5 - t));
        },
        0.0, 0.5);
    CHECK(t_star == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("single atom: the only coupling is the full mass") {
    const ProblemInstance inst = fixtures::one_atom(1.0);
    const OracleSolution sol = solve_primal_small(inst);
    REQUIRE(sol.coupling.entries.size() == 1);
    CHECK(sol.coupling.entries[0].mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("oracle value is sandwiched by duality against the dual solver") {
    for (double eps : {0.25, 0.6, 1.0, 2.0}) {
        const ProblemInstance inst = weighted_pair(eps);
        const OracleSolution sol = solve_primal_small(inst);
        const DualPotentials ref = converged_reference(inst);
        const double dual_value = gamma_objective(inst, ref);

        // Any feasible primal upper-bounds any dual value; at the optimum the
        // two meet, so the oracle value is pinned from both sides.
        CHECK(sol.value >= dual_value - 1e-9);
        CHECK(sol.value <= dual_value + 1e-8);

        // And the dual-induced coupling is the same matrix.
        const Matrix from_dual = primal_from_dual(inst, ref).dense();
        const Matrix from_oracle = sol.coupling.dense();
        CHECK((from_dual - from_oracle).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("oracle improves on the independent coupling and stays feasible") {
    std::mt19937 rng(83);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 3);
        const int m = 2 + static_cast<int>(rng() % 3);
        Matrix pn(n, 1), qm(m, 1);
        for (int i = 0; i < n; ++i) pn(i, 0) = testutil::runif(rng, 0.0, 1.0);
        for (int j = 0; j < m; ++j) qm(j, 0) = testutil::runif(rng, 0.0, 1.0);
        const DiscreteMeasure P = make_measure(pn, testutil::rweights(rng, n));
        const DiscreteMeasure Q = make_measure(qm, testutil::rweights(rng, m));
        CostSpec spec;
        spec.kind = CostKind::Euclidean;
        const ProblemInstance inst = make_instance(
            P, Q, spec, testutil::runif(rng, 0.3, 2.0),
            empirical_geometry(P, Q, DensityBounds{1.0, 1.0}, 1.0, 1.0));

        const OracleSolution sol = solve_primal_small(inst);
        const auto [row_res, col_res] = marginal_residual(inst, sol.coupling);
        CHECK(row_res <= 1e-11);
        CHECK(col_res <= 1e-11);
        CHECK(sol.kkt_residual <= 1e-11);

        Coupling indep;
        indep.n = inst.n();
        indep.m = inst.m();
        for (int i = 0; i < inst.n(); ++i)
            for (int j = 0; j < inst.m(); ++j)
                indep.entries.push_back(
                    {i, j, inst.P.weights[i] * inst.Q.weights[j]});
        CHECK(sol.value <= primal_objective(inst, indep) + 1e-12);
    }
}

TEST_CASE("oracle input validation") {
    Matrix big(9, 1), other(8, 1);
    for (int i = 0; i < 9; ++i) big(i, 0) = i;
    for (int j = 0; j < 8; ++j) other(j, 0) = j + 0.5;
    const DiscreteMeasure P = make_measure(big, Vector::Constant(9, 1.0 / 9));
    const DiscreteMeasure Q = make_measure(other, Vector::Constant(8, 0.125));
    CostSpec spec;
    spec.kind = CostKind::Euclidean;
    const ProblemInstance inst = make_instance(
        P, Q, spec, 1.0, empirical_geometry(P, Q, DensityBounds{1.0, 1.0}, 1.0, 1.0));
    CHECK_THROWS_AS(solve_primal_small(inst), InstanceTooLarge);

    ProblemInstance doubled = fixtures::two_by_two(1.0);
    doubled.P.weights *= 2.0;
    CHECK_THROWS_AS(solve_primal_small(doubled), InfeasibleMarginals);

    ProblemInstance hollow = fixtures::two_by_two(1.0);
    hollow.P.weights << 0.0, 1.0;
    CHECK_THROWS_AS(solve_primal_small(hollow), ZeroWeightCell);
}

TEST_CASE("content hash is stable, format-clean, and input-sensitive") {
    const ProblemInstance a = fixtures::two_by_two(1.0);
    const std::string h1 = instance_content_hash(a);
    const std::string h2 = instance_content_hash(a);
    CHECK(h1 == h2);
    CHECK(h1.size() == 16);
    for (char c : h1) CHECK(std::isxdigit(static_cast<unsigned char>(c)));

    const ProblemInstance b = fixtures::two_by_two(0.5);
    CHECK(instance_content_hash(b) != h1);

    ProblemInstance c = fixtures::two_by_two(1.0);
    c.cost(0, 1) += 1e-9;
    CHECK(instance_content_hash(c) != h1);
}

TEST_CASE("cached oracle round-trips through its JSON file bit-for-bit") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "qot_oracle_cache_test";
    fs::remove_all(dir);

    const ProblemInstance inst = fixtures::two_by_two(1.0);
    const OracleSolution first = solve_primal_small_cached(inst, dir.string());
    const fs::path expect =
        dir / ("oracle_" + instance_content_hash(inst) + ".json");
    CHECK(fs::exists(expect));

    const OracleSolution second = solve_primal_small_cached(inst, dir.string());
    CHECK(second.value == first.value);
    CHECK(second.kkt_residual == first.kkt_residual);
    CHECK(second.iterations == first.iterations);
    REQUIRE(second.coupling.entries.size() == first.coupling.entries.size());
    for (size_t k = 0; k < first.coupling.entries.size(); ++k) {
        CHECK(second.coupling.entries[k].i == first.coupling.entries[k].i);
        CHECK(second.coupling.entries[k].j == first.coupling.entries[k].j);
        CHECK(second.coupling.entries[k].mass == first.coupling.entries[k].mass);
    }
    fs::remove_all(dir);
}

TEST_CASE("first-order certificate separates solved from unsolved potentials") {
    const ProblemInstance inst = fixtures::two_by_two(1.0);

    const DualPotentials good{Vector::Constant(2, 0.75), Vector::Constant(2, 0.75)};
    const KktCertificate pass = kkt_certificate(inst, good);
    CHECK(pass.pass);
    CHECK(pass.foc == 0.0);
    CHECK(pass.objective == 0.875);
    CHECK(pass.gap == 0.0);

    const DualPotentials bad{Vector::Zero(2), Vector::Zero(2)};
    const KktCertificate fail = kkt_certificate(inst, bad);
    CHECK_FALSE(fail.pass);
    CHECK(fail.foc > 1e-3);
}
