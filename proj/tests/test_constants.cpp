#include <doctest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "qot/constants.hpp"
#include "qot/errors.hpp"
#include "testutil.hpp"

using namespace qot;

namespace {

// The full closed form, assembled independently of the library's factoring.
double beta_by_hand(double delta, double radius, int d, double lambda, double Lambda,
                    double q0, double C_Omega, double ceil_term) {
    const double kappa = delta * std::pow(std::min(radius, 1.0), d);
    const double alpha = (lambda / Lambda) * (lambda / Lambda) * q0 /
                         (C_Omega * std::pow(ceil_term, d + 2));
    return 0.25 * kappa * alpha;
}

DualPotentials two_by_two_optimum() {
    return {Vector::Constant(2, 0.75), Vector::Constant(2, 0.75)};
}

}  // namespace

TEST_CASE("degenerate single-atom geometry gives the exact unit constants") {
    // Radius eps/8L = 1, empty diameter so the covering term is 1, and the
    // ball mass is the whole measure: every factor collapses to 1.
    const ProblemInstance inst = fixtures::one_atom(8.0);
    const PLConstants c = compute_pl_constants(inst.geometry, 8.0, 1);
    CHECK(c.radius == 1.0);
    CHECK(c.kappa == 1.0);
    CHECK(c.alpha == 1.0);
    CHECK(c.beta_eps == 0.25);
    CHECK(c.gamma_eps == 16.0);
    CHECK(c.variant == PLVariant::Lipschitz);
    CHECK_FALSE(c.empirical);
}

TEST_CASE("beta * gamma == 4 to machine precision for every variant") {
    const ProblemInstance tiny = fixtures::one_atom(8.0);
    const ProblemInstance pair = fixtures::two_by_two(1.0);

    std::vector<PLConstants> all;
    all.push_back(compute_pl_constants(tiny.geometry, 8.0, 1));
    for (double eps : {0.25, 0.5, 1.0, 3.0})
        all.push_back(compute_pl_constants(pair.geometry, eps, 1));

    Modulus lin;
    lin.eval = [](double r) { return r; };
    lin.inverse = [](double s) { return s; };
    lin.coordinatewise = true;
    all.push_back(compute_pl_constants_modulus(pair.geometry, lin, 0.3, 1, 10.0));
    all.push_back(compute_pl_constants_connected(pair.geometry, 1.0, 1, 2.0, 0.5));

    for (const PLConstants& c : all) {
        CHECK(std::abs(c.beta_eps * c.gamma_eps - 4.0) <= 4.0 * 1e-15);
        CHECK(c.kappa <= 1.0 + 1e-15);
        CHECK(c.alpha <= 1.0 + 1e-15);
        CHECK(c.beta_eps <= 1.0);
        CHECK(c.gamma_eps >= 4.0);
    }
}

TEST_CASE("two-point geometry: every factor matches the hand-assembled form") {
    const ProblemInstance inst = fixtures::two_by_two(1.0);
    const double eps = 1.0;
    const PLConstants c = compute_pl_constants(inst.geometry, eps, 1);

    const double radius = eps / 8.0;      // L = 1
    const double q0 = 0.5;                // one atom of the uniform pair
    const double ceil_term = 8.0;         // ceil(8 * 1 * 1 / 1)
    CHECK(c.radius == radius);
    CHECK(c.kappa == doctest::Approx(radius).epsilon(1e-15));  // delta = 1, d = 1
    CHECK(c.alpha == doctest::Approx(q0 / std::pow(ceil_term, 3)).epsilon(1e-15));
    CHECK(c.beta_eps ==
          doctest::Approx(beta_by_hand(1.0, radius, 1, 1.0, 1.0, q0, 1.0, ceil_term))
              .epsilon(1e-14));
}

TEST_CASE("linear-modulus constants coincide with the Lipschitz-path constants") {
    const ProblemInstance inst = fixtures::two_by_two(1.0);
    const double eps = 0.3;  // keeps the covering argument away from integers
    Modulus lin;
    lin.eval = [](double r) { return r; };  // omega = L r with L = 1
    lin.inverse = [](double s) { return s; };
    lin.coordinatewise = true;

    const PLConstants a = compute_pl_constants(inst.geometry, eps, 1);
    const PLConstants b = compute_pl_constants_modulus(inst.geometry, lin, eps, 1, 100.0);
    CHECK(b.variant == PLVariant::Modulus);
    CHECK(b.radius == doctest::Approx(a.radius).epsilon(1e-12));
    CHECK(b.kappa == doctest::Approx(a.kappa).epsilon(1e-12));
    CHECK(b.alpha == doctest::Approx(a.alpha).epsilon(1e-12));
    CHECK(b.beta_eps == doctest::Approx(a.beta_eps).epsilon(1e-12));
    CHECK(b.gamma_eps == doctest::Approx(a.gamma_eps).epsilon(1e-12));
}

TEST_CASE("sqrt-modulus constants: integer covering argument survives the guard") {
    const ProblemInstance inst = fixtures::two_by_two(1.0);
    Modulus sq;
    sq.eval = [](double r) { return std::sqrt(r); };
    sq.inverse = [](double s) { return s * s; };
    sq.coordinatewise = true;

    // radius = (eps/8)^2 = 1/16 exactly; diam/radius = 16 must not ceil to 17.
    const PLConstants c = compute_pl_constants_modulus(inst.geometry, sq, 2.0, 1, 10.0);
    CHECK(c.radius == 0.0625);
    CHECK(c.beta_eps ==
          doctest::Approx(beta_by_hand(1.0, 0.0625, 1, 1.0, 1.0, 0.5, 1.0, 16.0))
              .epsilon(1e-14));
}

TEST_CASE("modulus variant works without a resolved Lipschitz constant") {
    Matrix pts(2, 1);
    pts << 0.0, 1.0;
    const DiscreteMeasure mu = make_measure(pts, Vector::Constant(2, 0.5));
    GeometryConstants geo = empirical_geometry(mu, mu, DensityBounds{1.0, 1.0}, 1.0);
    CHECK(geo.lipschitz_L == 0.0);

    Modulus lin;
    lin.eval = [](double r) { return r; };
    lin.inverse = [](double s) { return s; };
    lin.coordinatewise = true;
    CHECK_NOTHROW(compute_pl_constants_modulus(geo, lin, 1.0, 1, 10.0));
    CHECK_THROWS_AS(compute_pl_constants(geo, 1.0, 1), MissingGeometry);
}

TEST_CASE("connected variant: overlap factor and effective visibility") {
    const ProblemInstance inst = fixtures::two_by_two(1.0);

    // C_Omega = 1 with delta_tilde = delta_P reproduces the base variant.
    const PLConstants base = compute_pl_constants(inst.geometry, 1.0, 1);
    const PLConstants same =
        compute_pl_constants_connected(inst.geometry, 1.0, 1, 1.0, inst.geometry.delta_P);
    CHECK(same.variant == PLVariant::ConnectedLipschitz);
    CHECK(same.beta_eps == doctest::Approx(base.beta_eps).epsilon(1e-15));

    // The overlap factor scales alpha down linearly.
    const PLConstants half =
        compute_pl_constants_connected(inst.geometry, 1.0, 1, 2.0, inst.geometry.delta_P);
    CHECK(half.alpha == doctest::Approx(0.5 * base.alpha).epsilon(1e-15));

    // delta_tilde = min(1, lambda_P * delta_Omega) when derived indirectly.
    const PLConstants derived =
        compute_pl_constants_connected(inst.geometry, 1.0, 1, 1.0, {}, 0.25);
    CHECK(derived.kappa == doctest::Approx(0.25 * base.kappa).epsilon(1e-15));
    const PLConstants capped =
        compute_pl_constants_connected(inst.geometry, 1.0, 1, 1.0, {}, 50.0);
    CHECK(capped.kappa == doctest::Approx(base.kappa).epsilon(1e-15));

    CHECK_THROWS_AS(compute_pl_constants_connected(inst.geometry, 1.0, 1, 0.5, 1.0),
                    COmegaLessThanOne);
    CHECK_THROWS_AS(compute_pl_constants_connected(inst.geometry, 1.0, 1, 1.0),
                    MissingGeometry);
}

TEST_CASE("beta grows and gamma shrinks as regularization loosens") {
    const ProblemInstance inst = fixtures::two_by_two(1.0);
    double prev_beta = 0.0;
    double prev_gamma = std::numeric_limits<double>::infinity();
    for (double eps : {0.1, 0.25, 0.5, 1.0, 2.0, 8.0, 20.0}) {
        const PLConstants c = compute_pl_constants(inst.geometry, eps, 1);
        CHECK(c.beta_eps >= prev_beta);
        CHECK(c.gamma_eps <= prev_gamma);
        prev_beta = c.beta_eps;
        prev_gamma = c.gamma_eps;
    }
}

TEST_CASE("geometry validation failures") {
    const ProblemInstance inst = fixtures::two_by_two(1.0);
    GeometryConstants geo = inst.geometry;

    CHECK_THROWS_AS(compute_pl_constants(geo, 0.0, 1), MissingGeometry);
    CHECK_THROWS_AS(compute_pl_constants(geo, 1.0, 0), MissingGeometry);

    GeometryConstants bad = geo;
    bad.lambda_P = 0.0;
    CHECK_THROWS_AS(compute_pl_constants(bad, 1.0, 1), MissingGeometry);
    bad = geo;
    bad.Lambda_P = 0.5 * bad.lambda_P;
    CHECK_THROWS_AS(compute_pl_constants(bad, 1.0, 1), MissingGeometry);
    bad = geo;
    bad.delta_P = 1.5;
    CHECK_THROWS_AS(compute_pl_constants(bad, 1.0, 1), MissingGeometry);
    bad = geo;
    bad.ball_inf_fn = nullptr;
    CHECK_THROWS_AS(compute_pl_constants(bad, 1.0, 1), MissingGeometry);
}

TEST_CASE("localization radius from the sup distance") {
    const ProblemInstance inst = fixtures::two_by_two(1.0);
    const DualPotentials star = two_by_two_optimum();
    DualPotentials pot = star;
    pot.f.array() += 2.5;  // oplus sup distance exactly 2.5

    const auto [C, r0] = localization_radius(inst, pot, star);
    CHECK(C == 2.5);
    CHECK(r0 == doctest::Approx(1.0 / 5.0).epsilon(1e-15));

    const auto [C0, r00] = localization_radius(inst, star, star);
    CHECK(C0 == 0.0);
    CHECK(r00 == 1.0);

    DualPotentials near = star;
    near.f.array() += 1e-3;  // r0 capped at 1
    CHECK(localization_radius(inst, near, star).second == 1.0);
}

TEST_CASE("gradient-dominance and error-bound ratios certify on random potentials") {
    const ProblemInstance inst = fixtures::two_by_two(1.0);
    const PLConstants consts = compute_pl_constants(inst.geometry, inst.eps, 1);
    const DualPotentials star = two_by_two_optimum();

    std::mt19937 rng(59);
    int informative = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const DualPotentials pot{testutil::rvec(rng, 2, -1.0, 1.0),
                                 testutil::rvec(rng, 2, -1.0, 1.0)};
        const double pl = pl_ratio(inst, pot, star, consts);
        const double eb = error_bound_ratio(inst, pot, star, consts);
        CHECK(pl >= 1.0 - 1e-9);
        CHECK(eb >= 1.0 - 1e-9);
        if (std::isfinite(pl)) ++informative;
    }
    CHECK(informative >= 45);  // random potentials are essentially never optimal

    // At the reference itself both ratios hit their noise-floor sentinel.
    CHECK(std::isinf(pl_ratio(inst, star, star, consts)));
    CHECK(std::isinf(error_bound_ratio(inst, star, star, consts)));

    const DualPotentials origin{Vector::Zero(2), Vector::Zero(2)};
    CHECK_THROWS_AS(pl_ratio(inst, origin, origin, consts), ReferenceNotOptimal);
    CHECK_THROWS_AS(error_bound_ratio(inst, origin, origin, consts), ReferenceNotOptimal);
}
