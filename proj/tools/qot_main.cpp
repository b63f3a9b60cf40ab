// qot -- command-line front end for the dual QOT toolkit.
//
//   solve      run one algorithm, write potentials / coupling / trace
//   verify     checked run against a certified reference, write report.json
//   constants  print the certified curvature constants as JSON
//   compare    run several algorithms from one start, tabulate their gaps
//   oracle     exact primal solve for desk-size instances
//
// Exit codes: 0 success, 2 configuration or input error, 3 solver failure
// (non-finite iterates), 4 a verification check failed (report still written).
//
// The binary does no arithmetic of its own beyond formatting: every number it
// prints or writes comes out of the library.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qot/constants.hpp"
#include "qot/dual_core.hpp"
#include "qot/errors.hpp"
#include "qot/io.hpp"
#include "qot/oracle.hpp"
#include "qot/solvers.hpp"
#include "qot/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<double> eps;
    std::optional<std::string> variant;
    bool unsafe_step = false;
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw qot::BadFileFormat("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw qot::BadFileFormat(path + ": " + e.what());
    }
    return j;
}

// Paths inside a config resolve relative to the config file's directory.
std::string resolve_path(const fs::path& base, const std::string& value) {
    fs::path p(value);
    if (p.is_absolute()) return p.string();
    return (base / p).string();
}

const json& require_key(const json& cfg, const std::string& key) {
    if (!cfg.contains(key)) throw qot::BadFileFormat("config: missing key '" + key + "'");
    return cfg.at(key);
}

qot::Algorithm parse_algorithm(const std::string& name) {
    if (name == "gradient_ascent") return qot::Algorithm::GradientAscent;
    if (name == "coordinate_ascent") return qot::Algorithm::CoordinateAscent;
    if (name == "coordinate_gradient_ascent")
        return qot::Algorithm::CoordinateGradientAscent;
    throw qot::BadFileFormat("config: unknown algorithm '" + name + "'");
}

std::string algorithm_name(qot::Algorithm alg) {
    switch (alg) {
        case qot::Algorithm::GradientAscent: return "gradient_ascent";
        case qot::Algorithm::CoordinateAscent: return "coordinate_ascent";
        case qot::Algorithm::CoordinateGradientAscent: return "coordinate_gradient_ascent";
    }
    return "?";
}

struct LoadedProblem {
    qot::ProblemInstance inst;
    json cfg;
    fs::path base;           // directory of the config file
    qot::CostSpec cost_spec; // kept for the modulus constants variant
    bool has_geometry = false;
};

LoadedProblem load_problem(const CliOptions& opt) {
    if (opt.config_path.empty()) throw qot::BadFileFormat("a --config file is required");
    LoadedProblem lp;
    lp.cfg = read_json_file(opt.config_path);
    lp.base = fs::path(opt.config_path).parent_path();

    qot::DiscreteMeasure P =
        qot::load_measure(resolve_path(lp.base, require_key(lp.cfg, "p_measure").get<std::string>()));
    qot::DiscreteMeasure Q =
        qot::load_measure(resolve_path(lp.base, require_key(lp.cfg, "q_measure").get<std::string>()));
    lp.cost_spec =
        qot::load_cost_spec(resolve_path(lp.base, require_key(lp.cfg, "cost").get<std::string>()));

    const double eps =
        opt.eps ? *opt.eps : require_key(lp.cfg, "eps").get<double>();

    // Without a geometry file the instance still solves; only the certified
    // constants are unavailable (their entry points reject the zero fields).
    qot::GeometryConstants geo;
    if (lp.cfg.contains("geometry")) {
        const qot::GeometryFile gf =
            qot::load_geometry(resolve_path(lp.base, lp.cfg.at("geometry").get<std::string>()));
        geo = qot::empirical_geometry(P, Q, qot::DensityBounds{gf.lambda_P, gf.Lambda_P},
                                      gf.delta_P, gf.lipschitz_L);
        lp.has_geometry = true;
    }
    lp.inst = qot::make_instance(std::move(P), std::move(Q), lp.cost_spec, eps, geo);
    return lp;
}

qot::SolverConfig make_solver_config(const LoadedProblem& lp, const CliOptions& opt,
                                     qot::Algorithm alg) {
    qot::SolverConfig c;
    c.algorithm = alg;
    if (lp.cfg.contains("step_size"))
        c.step_size = lp.cfg.at("step_size").get<double>();
    else if (alg != qot::Algorithm::CoordinateAscent)
        c.step_size = qot::default_step_size(lp.inst, alg);
    if (lp.cfg.contains("max_iters")) c.max_iters = lp.cfg.at("max_iters").get<int>();
    if (lp.cfg.contains("grad_tol")) c.grad_tol = lp.cfg.at("grad_tol").get<double>();
    c.unsafe_step = opt.unsafe_step;
    c.record_trace = true;
    return c;
}

qot::DualPotentials load_start(const LoadedProblem& lp) {
    if (lp.cfg.contains("start"))
        return qot::load_potentials(resolve_path(lp.base, lp.cfg.at("start").get<std::string>()));
    return {qot::Vector::Zero(lp.inst.n()), qot::Vector::Zero(lp.inst.m())};
}

qot::SolveResult run_algorithm(const qot::ProblemInstance& inst, qot::Algorithm alg,
                               const qot::DualPotentials& start,
                               const qot::SolverConfig& config) {
    switch (alg) {
        case qot::Algorithm::GradientAscent:
            return qot::gradient_ascent_run(inst, start, config);
        case qot::Algorithm::CoordinateAscent:
            return qot::coordinate_ascent_run(inst, start.g, config);
        case qot::Algorithm::CoordinateGradientAscent:
            return qot::coordinate_gradient_ascent_run(inst, start, config);
    }
    throw qot::Error("unreachable algorithm dispatch");
}

// Constants for the requested variant, plus the inputs echo that goes into
// the printed JSON. The connected variant insists on C_Omega up front.
qot::PLConstants make_constants(const LoadedProblem& lp, const CliOptions& opt,
                                json& inputs) {
    const std::string variant =
        opt.variant ? *opt.variant : lp.cfg.value("variant", std::string("lipschitz"));
    const int d = lp.inst.P.dim();
    inputs = json{{"eps", lp.inst.eps}, {"dim", d}};

    if (variant == "lipschitz")
        return qot::compute_pl_constants(lp.inst.geometry, lp.inst.eps, d);

    if (variant == "modulus") {
        qot::Modulus modulus;
        if (lp.cfg.contains("modulus"))
            modulus = qot::load_modulus(
                resolve_path(lp.base, lp.cfg.at("modulus").get<std::string>()));
        else if (lp.cost_spec.modulus)
            modulus = *lp.cost_spec.modulus;
        else
            throw qot::MissingModulus("the modulus variant needs a 'modulus' file");
        const double R =
            lp.cfg.value("truncation_radius", lp.inst.geometry.diam_Omega);
        inputs["truncation_radius"] = R;
        return qot::compute_pl_constants_modulus(lp.inst.geometry, modulus, lp.inst.eps, d, R);
    }

    if (variant == "connected") {
        if (!lp.cfg.contains("C_Omega"))
            throw qot::MissingGeometry("the connected variant requires C_Omega");
        const double C_Omega = lp.cfg.at("C_Omega").get<double>();
        std::optional<double> delta_P_tilde, delta_Omega;
        if (lp.cfg.contains("delta_P_tilde"))
            delta_P_tilde = lp.cfg.at("delta_P_tilde").get<double>();
        if (lp.cfg.contains("delta_Omega"))
            delta_Omega = lp.cfg.at("delta_Omega").get<double>();
        inputs["C_Omega"] = C_Omega;
        if (delta_P_tilde) inputs["delta_P_tilde"] = *delta_P_tilde;
        if (delta_Omega) inputs["delta_Omega"] = *delta_Omega;
        return qot::compute_pl_constants_connected(lp.inst.geometry, lp.inst.eps, d, C_Omega,
                                                   delta_P_tilde, delta_Omega);
    }
    throw qot::BadFileFormat("unknown constants variant '" + variant + "'");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw qot::BadFileFormat("cannot open " + path.string() + " for writing");
    out << text;
}

int cmd_solve(const CliOptions& opt) {
    const LoadedProblem lp = load_problem(opt);
    const qot::Algorithm alg =
        parse_algorithm(require_key(lp.cfg, "algorithm").get<std::string>());
    qot::SolverConfig config = make_solver_config(lp, opt, alg);
    if (lp.cfg.contains("reference"))
        config.reference = qot::load_potentials(
            resolve_path(lp.base, lp.cfg.at("reference").get<std::string>()));
    const qot::DualPotentials start = load_start(lp);

    const qot::SolveResult res = run_algorithm(lp.inst, alg, start, config);

    fs::create_directories(opt.out_dir);
    const fs::path out(opt.out_dir);
    qot::save_potentials(res.potentials, (out / "potentials.json").string());
    qot::save_coupling(qot::primal_from_dual(lp.inst, res.potentials),
                       (out / "coupling.csv").string());
    qot::save_trace(res.trace, (out / "trace.csv").string());

    const qot::TraceRow& last = res.trace.rows.back();
    std::cout << "objective " << qot::format_double(last.objective) << "\n";
    if (last.gap) std::cout << "gap " << qot::format_double(*last.gap) << "\n";
    std::cout << "iterations " << res.iterations << "\n";
    std::cout << "converged " << (res.converged ? "true" : "false") << "\n";
    return 0;
}

int cmd_verify(const CliOptions& opt) {
    const LoadedProblem lp = load_problem(opt);
    const qot::Algorithm alg =
        parse_algorithm(require_key(lp.cfg, "algorithm").get<std::string>());
    const qot::SolverConfig config = make_solver_config(lp, opt, alg);
    const qot::DualPotentials start = load_start(lp);

    json inputs;
    const qot::PLConstants consts = make_constants(lp, opt, inputs);

    qot::VerifyOptions vo;
    if (lp.cfg.contains("checks")) {
        const json& checks = lp.cfg.at("checks");
        vo.check_pl = checks.value("pl", true);
        vo.check_error_bound = checks.value("error_bound", true);
        vo.check_rate = checks.value("rate", true);
        vo.check_iterate_bounds = checks.value("iterate_bounds", true);
        vo.check_coercivity = checks.value("coercivity", true);
    }
    if (lp.cfg.contains("reference_solve")) {
        const json& rs = lp.cfg.at("reference_solve");
        vo.reference_grad_tol = rs.value("grad_tol", vo.reference_grad_tol);
        vo.max_iters = rs.value("max_iters", vo.max_iters);
    }
    if (lp.cfg.contains("reference"))
        vo.external_reference = qot::load_potentials(
            resolve_path(lp.base, lp.cfg.at("reference").get<std::string>()));

    const qot::VerificationReport report =
        qot::verify_run(lp.inst, config, start, consts, vo);

    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back(json{{"name", c.name},
                              {"enabled", c.enabled},
                              {"pass", c.pass},
                              {"worst", c.worst},
                              {"note", c.note}});
    }
    json doc{{"all_pass", report.all_pass},
             {"reference_objective", report.reference_objective},
             {"theoretical_q", report.theoretical_q},
             {"empirical_gamma", report.empirical_gamma},
             {"constants", qot::constants_to_json(consts, inputs)},
             {"checks", checks},
             {"run", json{{"converged", report.run.converged},
                          {"iterations", report.run.iterations},
                          {"final_grad_l2", report.run.final_grad_l2}}}};
    doc["coercivity"] =
        report.coercivity ? qot::certificate_to_json(*report.coercivity) : json(nullptr);

    fs::create_directories(opt.out_dir);
    const fs::path out(opt.out_dir);
    write_text(out / "report.json", doc.dump(2) + "\n");
    qot::save_trace(report.run.trace, (out / "trace.csv").string());

    for (const auto& c : report.checks) {
        if (!c.enabled || c.pass) continue;
        if (c.name == "reference_certified")
            std::cerr << "ReferenceNotOptimal: " << c.note << "\n";
        else
            std::cerr << "check failed: " << c.name << " (" << c.note << ")\n";
    }
    std::cout << (report.all_pass ? "all checks passed" : "verification failed") << "\n";
    return report.all_pass ? 0 : 4;
}

int cmd_constants(const CliOptions& opt) {
    const LoadedProblem lp = load_problem(opt);
    json inputs;
    const qot::PLConstants consts = make_constants(lp, opt, inputs);
    std::cout << qot::constants_to_json(consts, inputs).dump(2) << "\n";
    return 0;
}

int cmd_compare(const CliOptions& opt) {
    const LoadedProblem lp = load_problem(opt);
    const json& algs = require_key(lp.cfg, "algorithms");
    if (!algs.is_array() || algs.size() < 2)
        throw qot::BadFileFormat("compare needs at least two algorithms");
    std::vector<qot::Algorithm> algorithms;
    for (const auto& a : algs) algorithms.push_back(parse_algorithm(a.get<std::string>()));

    json inputs;
    const qot::PLConstants consts = make_constants(lp, opt, inputs);
    const qot::DualPotentials start = load_start(lp);

    // One certified reference shared by every run.
    qot::SolverConfig ref_cfg;
    ref_cfg.algorithm = qot::Algorithm::CoordinateAscent;
    ref_cfg.grad_tol = 1e-12;
    ref_cfg.max_iters = 200000;
    ref_cfg.record_trace = false;
    if (lp.cfg.contains("reference_solve")) {
        const json& rs = lp.cfg.at("reference_solve");
        ref_cfg.grad_tol = rs.value("grad_tol", ref_cfg.grad_tol);
        ref_cfg.max_iters = rs.value("max_iters", ref_cfg.max_iters);
    }
    const qot::DualPotentials reference =
        qot::coordinate_ascent_run(lp.inst, qot::Vector::Zero(lp.inst.m()), ref_cfg).potentials;
    const qot::KktCertificate cert = qot::kkt_certificate(lp.inst, reference);
    if (!cert.pass) {
        std::cerr << "ReferenceNotOptimal: the shared reference failed its certificate\n";
        return 4;
    }

    std::vector<qot::SolveResult> results;
    size_t longest = 0;
    for (const qot::Algorithm alg : algorithms) {
        qot::SolverConfig c = make_solver_config(lp, opt, alg);
        c.reference = reference;
        results.push_back(run_algorithm(lp.inst, alg, start, c));
        longest = std::max(longest, results.back().trace.rows.size());
    }

    // Combined gap table: one iter column, one gap column per algorithm,
    // blank cells where a trace has already ended.
    std::string csv = "iter";
    for (const qot::Algorithm alg : algorithms) csv += ",gap_" + algorithm_name(alg);
    csv += "\n";
    for (size_t k = 0; k < longest; ++k) {
        csv += std::to_string(k);
        for (const auto& res : results) {
            csv += ",";
            if (k < res.trace.rows.size() && res.trace.rows[k].gap)
                csv += qot::format_double(*res.trace.rows[k].gap);
        }
        csv += "\n";
    }
    fs::create_directories(opt.out_dir);
    write_text(fs::path(opt.out_dir) / "compare.csv", csv);

    for (size_t a = 0; a < algorithms.size(); ++a) {
        qot::SolverConfig c = make_solver_config(lp, opt, algorithms[a]);
        c.reference = reference;
        const double contraction = qot::empirical_contraction(results[a].trace);
        std::cout << algorithm_name(algorithms[a]) << " iterations "
                  << results[a].iterations << " empirical_contraction "
                  << qot::format_double(contraction);
        if (!c.unsafe_step) {
            const qot::RateBound rb =
                qot::theoretical_rate(lp.inst, c, start, consts.gamma_eps);
            std::cout << " theoretical_contraction " << qot::format_double(1.0 - rb.q);
        }
        std::cout << "\n";
    }
    return 0;
}

int cmd_oracle(const CliOptions& opt) {
    const LoadedProblem lp = load_problem(opt);
    qot::OracleSolution sol;
    if (lp.cfg.contains("cache_dir"))
        sol = qot::solve_primal_small_cached(
            lp.inst, resolve_path(lp.base, lp.cfg.at("cache_dir").get<std::string>()));
    else
        sol = qot::solve_primal_small(lp.inst);

    fs::create_directories(opt.out_dir);
    qot::save_coupling(sol.coupling, (fs::path(opt.out_dir) / "oracle_coupling.csv").string());

    const json doc{{"value", sol.value},
                   {"kkt_residual", sol.kkt_residual},
                   {"multiplier_residual", sol.multiplier_residual},
                   {"iterations", sol.iterations},
                   {"method", sol.method}};
    std::cout << doc.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual-side solver and verification toolkit for quadratically "
                 "regularized optimal transport"};
    app.require_subcommand(1);

    CliOptions opt;
    double eps_value = 0.0;
    std::string variant_value;
    app.add_option("--config", opt.config_path, "JSON run configuration");
    app.add_option("--out-dir", opt.out_dir, "directory for output files");
    auto* eps_opt = app.add_option("--eps", eps_value, "override the regularization strength");
    app.add_flag("--unsafe-step", opt.unsafe_step,
                 "allow step sizes outside the certified range");
    auto* variant_opt =
        app.add_option("--variant", variant_value, "constants variant")
            ->check(CLI::IsMember({"lipschitz", "modulus", "connected"}));

    CLI::App* sub_solve = app.add_subcommand("solve", "run one algorithm");
    CLI::App* sub_verify = app.add_subcommand("verify", "checked run with a written report");
    CLI::App* sub_constants = app.add_subcommand("constants", "print the certified constants");
    CLI::App* sub_compare = app.add_subcommand("compare", "run several algorithms together");
    CLI::App* sub_oracle = app.add_subcommand("oracle", "exact primal solve (small instances)");
    for (CLI::App* sub : {sub_solve, sub_verify, sub_constants, sub_compare, sub_oracle})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (eps_opt->count() > 0) opt.eps = eps_value;
    if (variant_opt->count() > 0) opt.variant = variant_value;

    try {
        if (sub_solve->parsed()) return cmd_solve(opt);
        if (sub_verify->parsed()) return cmd_verify(opt);
        if (sub_constants->parsed()) return cmd_constants(opt);
        if (sub_compare->parsed()) return cmd_compare(opt);
        if (sub_oracle->parsed()) return cmd_oracle(opt);
    } catch (const qot::NonFiniteIterate& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
