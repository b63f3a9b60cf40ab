#pragma once

#include <Eigen/Dense>
#include <vector>

namespace qot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// 0/1 section indicator, stored dense; desk-scale problems only.
using IndicatorMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Dual pair (f, g); f lives on the atoms of P, g on the atoms of Q.
// Potentials are identified up to the shift (f + a, g - a).
struct DualPotentials {
    Vector f;
    Vector g;
};

// Sparse nonnegative coupling; entries hold only strictly positive mass.
struct CouplingEntry {
    int i;
    int j;
    double mass;
};

struct Coupling {
    int n = 0;  // rows (atoms of P)
    int m = 0;  // cols (atoms of Q)
    std::vector<CouplingEntry> entries;

    Matrix dense() const {
        Matrix pi = Matrix::Zero(n, m);
        for (const auto& e : entries) pi(e.i, e.j) += e.mass;
        return pi;
    }
};

}  // namespace qot
