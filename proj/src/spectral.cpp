#include "qot/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "qot/errors.hpp"

namespace qot {

SectionSets build_sections(const ProblemInstance& inst, const DualPotentials& pot_star,
                           const DualPotentials& pot, double r) {
    if (!(r >= 0.0 && r <= 1.0)) throw ROutOfRange();
    const DualPotentials at = phi_path(pot_star, pot, r);
    const int n = inst.n(), m = inst.m();
    SectionSets s;
    s.indicator.resize(n, m);
    s.row_masses = Vector::Zero(n);
    s.col_masses = Vector::Zero(m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const bool in = at.f[i] + at.g[j] >= inst.cost(i, j);
            s.indicator(i, j) = in;
            if (in) {
                s.row_masses[i] += inst.Q.weights[j];
                s.col_masses[j] += inst.P.weights[i];
            }
        }
    return s;
}

CoercivityOperator make_coercivity_operator(const ProblemInstance& inst,
                                            const SectionSets& sections) {
    if (sections.indicator.rows() != inst.n() || sections.indicator.cols() != inst.m())
        throw LengthMismatch("section shape vs supports");
    return {sections, inst.P.weights, inst.Q.weights};
}

std::pair<Vector, Vector> apply_coercivity(const CoercivityOperator& op, const Vector& u,
                                           const Vector& v) {
    const int n = static_cast<int>(op.p.size()), m = static_cast<int>(op.q.size());
    if (u.size() != n || v.size() != m) throw LengthMismatch("pair shape vs operator");

    // Total section mass of u (+) v, subtracted in halves from both blocks
    // to keep the image in the mean-zero quotient chart.
    double total = 0.0;
    Vector M1 = Vector::Zero(n), M2 = Vector::Zero(m);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
            if (!op.sections.indicator(i, j)) continue;
            acc += op.q[j] * v[j];
            M2[j] += op.p[i] * u[i];
        }
        M1[i] = u[i] * op.sections.row_masses[i] + acc;
        total += op.p[i] * (u[i] * op.sections.row_masses[i] + acc);
    }
    for (int j = 0; j < m; ++j) M2[j] += v[j] * op.sections.col_masses[j];
    M1.array() -= 0.5 * total;
    M2.array() -= 0.5 * total;
    return {std::move(M1), std::move(M2)};
}

double oplus_inner(const Vector& p, const Vector& q, const Vector& u, const Vector& v,
                   const Vector& ut, const Vector& vt) {
    const double mu = p.dot(u), mv = q.dot(v), mut = p.dot(ut), mvt = q.dot(vt);
    return p.dot(u.cwiseProduct(ut)) + q.dot(v.cwiseProduct(vt)) + mu * mvt + mut * mv;
}

MinEigenResult min_eigenvalue(const CoercivityOperator& op) {
    const int n = static_cast<int>(op.p.size()), m = static_cast<int>(op.q.size());
    if (op.p.minCoeff() <= 0.0 || op.q.minCoeff() <= 0.0)
        throw SingularGram("zero-weight atom makes the oplus Gram form singular");

    // Quadratic form of the operator in (u, v) coordinates.
    Matrix A = Matrix::Zero(n + m, n + m);
    for (int i = 0; i < n; ++i) A(i, i) = op.p[i] * op.sections.row_masses[i];
    for (int j = 0; j < m; ++j) A(n + j, n + j) = op.q[j] * op.sections.col_masses[j];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (op.sections.indicator(i, j)) A(i, n + j) = A(n + j, i) = op.p[i] * op.q[j];

    // Gram form of the oplus norm; its null direction is the shift (1, -1).
    Matrix B = Matrix::Zero(n + m, n + m);
    for (int i = 0; i < n; ++i) B(i, i) = op.p[i];
    for (int j = 0; j < m; ++j) B(n + j, n + j) = op.q[j];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) B(i, n + j) = B(n + j, i) = op.p[i] * op.q[j];

    // Deflate the shift: both forms vanish on it and are shift-invariant, so
    // any complement chart gives the same spectrum. An orthonormal basis of
    // the complement comes from the Householder frame of the shift vector.
    Vector z = Vector::Ones(n + m);
    z.tail(m).array() = -1.0;
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix Qfull = qr.householderQ();
    Matrix V = Qfull.rightCols(n + m - 1);

    Matrix Ared = V.transpose() * A * V;
    Matrix Bred = V.transpose() * B * V;
    Ared = 0.5 * (Ared + Ared.transpose());
    Bred = 0.5 * (Bred + Bred.transpose());

    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(Ared, Bred);
    if (solver.info() != Eigen::Success)
        throw SingularGram("generalized eigensolve failed");

    MinEigenResult out;
    out.lambda0 = solver.eigenvalues()(0);
    Vector x = V * solver.eigenvectors().col(0);
    out.u = x.head(n);
    out.v = x.tail(m);
    return out;
}

CoercivityCertificate coercivity_certificate(const ProblemInstance& inst,
                                             const DualPotentials& pot_star,
                                             const DualPotentials& pot,
                                             const PLConstants& consts,
                                             std::vector<double> r_samples) {
    const auto [C, r0] = localization_radius(inst, pot, pot_star);
    (void)C;
    if (r_samples.empty())
        r_samples = {0.0, 0.25 * r0, 0.5 * r0, 0.75 * r0, r0};
    for (double r : r_samples)
        if (!(r >= 0.0 && r <= r0)) throw RSampleOutOfRange();

    CoercivityCertificate cert;
    cert.r0 = r0;
    cert.beta_eps = consts.beta_eps;
    cert.min_lambda0 = std::numeric_limits<double>::infinity();
    cert.min_margin = std::numeric_limits<double>::infinity();
    cert.all_pass = true;

    const double dist_sq = [&] {
        const double d = oplus_l2_distance(inst, pot_star, pot);
        return d * d;
    }();

    for (double r : r_samples) {
        const SectionSets sections = build_sections(inst, pot_star, pot, r);
        const CoercivityOperator op = make_coercivity_operator(inst, sections);
        const MinEigenResult eig = min_eigenvalue(op);

        CertificateSample s;
        s.r = r;
        s.lambda0 = eig.lambda0;
        s.pass = eig.lambda0 >= consts.beta_eps - 1e-12;
        s.phi_second = phi_derivatives(inst, pot_star, pot, r).phi_second;
        s.phi_bound_pass =
            dist_sq <= (inst.eps / consts.beta_eps) * s.phi_second + 1e-12;

        cert.min_lambda0 = std::min(cert.min_lambda0, s.lambda0);
        cert.min_margin = std::min(cert.min_margin, s.lambda0 - consts.beta_eps);
        cert.all_pass = cert.all_pass && s.pass && s.phi_bound_pass;
        cert.samples.push_back(s);
    }
    return cert;
}

}  // namespace qot
