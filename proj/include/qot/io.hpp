#pragma once

#include <string>

#include <json.hpp>

#include "qot/constants.hpp"
#include "qot/costs.hpp"
#include "qot/measures.hpp"
#include "qot/solvers.hpp"
#include "qot/spectral.hpp"

namespace qot {

// All writers are deterministic: fixed key order (nlohmann sorts keys),
// shortest-round-trip doubles in JSON, %.17g in CSV.

std::string format_double(double x);  // 17 significant digits

// {"dim": d, "points": [[...]], "weights": [...]}  or CSV x1..xd,w with header.
DiscreteMeasure load_measure(const std::string& path);
void save_measure_json(const DiscreteMeasure& mu, const std::string& path);
void save_measure_csv(const DiscreteMeasure& mu, const std::string& path);

// {"kind": "matrix"|"squared_euclidean"|"euclidean"|"p_norm", "p": ..., "matrix": [[...]]}
CostSpec load_cost_spec(const std::string& path);
void save_cost_spec(const CostSpec& spec, const std::string& path);

// {"form": "linear"|"power", "coefficient": c, "exponent": a, "coordinatewise": bool}
Modulus load_modulus(const std::string& path);

// {"lambda_P":..., "Lambda_P":..., "delta_P":..., "lipschitz_L": optional}
// diam_Omega / ball_inf_fn are always recomputed from the instance data.
struct GeometryFile {
    double lambda_P = 0.0;
    double Lambda_P = 0.0;
    double delta_P = 0.0;
    std::optional<double> lipschitz_L;
};
GeometryFile load_geometry(const std::string& path);

// {"f": [...], "g": [...]}
DualPotentials load_potentials(const std::string& path);
void save_potentials(const DualPotentials& pot, const std::string& path);

// CSV i,j,mass
void save_coupling(const Coupling& pi, const std::string& path);
Coupling load_coupling(const std::string& path, int n, int m);

// CSV iter,objective,grad_l2,gap,sup_dist,l2_dist,pl_ratio (blank = absent)
void save_trace(const ConvergenceTrace& trace, const std::string& path);

nlohmann::json constants_to_json(const PLConstants& c, const nlohmann::json& inputs);
nlohmann::json certificate_to_json(const CoercivityCertificate& cert);

}  // namespace qot
