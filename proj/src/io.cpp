#include "qot/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qot/errors.hpp"

namespace qot {

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadFileFormat("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw BadFileFormat(path + ": " + e.what());
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw BadFileFormat("cannot write " + path);
    out << text;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw BadFileFormat(where + ": trailing junk in '" + s + "'");
        return v;
    } catch (const std::invalid_argument&) {
        throw BadFileFormat(where + ": not a number: '" + s + "'");
    } catch (const std::out_of_range&) {
        throw BadFileFormat(where + ": out of range: '" + s + "'");
    }
}

DiscreteMeasure measure_from_json(const json& j, const std::string& path) {
    if (!j.contains("dim") || !j.contains("points") || !j.contains("weights"))
        throw BadFileFormat(path + ": measure needs dim/points/weights");
    const int d = j["dim"].get<int>();
    const auto& pts = j["points"];
    const auto& ws = j["weights"];
    if (!pts.is_array() || !ws.is_array() || pts.size() != ws.size())
        throw BadFileFormat(path + ": points/weights shape mismatch");
    Matrix points(static_cast<Eigen::Index>(pts.size()), d);
    Vector weights(static_cast<Eigen::Index>(ws.size()));
    for (size_t i = 0; i < pts.size(); ++i) {
        if (!pts[i].is_array() || static_cast<int>(pts[i].size()) != d)
            throw BadFileFormat(path + ": point dimension mismatch");
        for (int k = 0; k < d; ++k)
            points(static_cast<Eigen::Index>(i), k) = pts[i][k].get<double>();
        weights[static_cast<Eigen::Index>(i)] = ws[i].get<double>();
    }
    return make_measure(points, weights);
}

DiscreteMeasure measure_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadFileFormat("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw BadFileFormat(path + ": empty file");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header.back() != "w")
        throw BadFileFormat(path + ": header must be x1,..,xd,w");
    const int d = static_cast<int>(header.size()) - 1;
    for (int k = 0; k < d; ++k)
        if (header[static_cast<size_t>(k)] != "x" + std::to_string(k + 1))
            throw BadFileFormat(path + ": header must be x1,..,xd,w");
    std::vector<double> coords, ws;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != d + 1)
            throw BadFileFormat(path + ": row width mismatch");
        for (int k = 0; k < d; ++k) coords.push_back(parse_double(cells[k], path));
        ws.push_back(parse_double(cells[d], path));
        ++rows;
    }
    Matrix points(rows, d);
    Vector weights(rows);
    for (int i = 0; i < rows; ++i) {
        for (int k = 0; k < d; ++k) points(i, k) = coords[static_cast<size_t>(i * d + k)];
        weights[i] = ws[static_cast<size_t>(i)];
    }
    return make_measure(points, weights);
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

DiscreteMeasure load_measure(const std::string& path) {
    if (ends_with(path, ".csv")) return measure_from_csv(path);
    return measure_from_json(read_json_file(path), path);
}

void save_measure_json(const DiscreteMeasure& mu, const std::string& path) {
    json pts = json::array(), ws = json::array();
    for (int i = 0; i < mu.size(); ++i) {
        json row = json::array();
        for (int k = 0; k < mu.dim(); ++k) row.push_back(mu.points(i, k));
        pts.push_back(row);
        ws.push_back(mu.weights[i]);
    }
    write_text_file(path, json{{"dim", mu.dim()}, {"points", pts}, {"weights", ws}}.dump(2) + "\n");
}

void save_measure_csv(const DiscreteMeasure& mu, const std::string& path) {
    std::string out;
    for (int k = 0; k < mu.dim(); ++k) out += "x" + std::to_string(k + 1) + ",";
    out += "w\n";
    for (int i = 0; i < mu.size(); ++i) {
        for (int k = 0; k < mu.dim(); ++k) out += format_double(mu.points(i, k)) + ",";
        out += format_double(mu.weights[i]) + "\n";
    }
    write_text_file(path, out);
}

CostSpec load_cost_spec(const std::string& path) {
    const json j = read_json_file(path);
    CostSpec spec;
    const std::string kind = j.value("kind", "");
    if (kind == "matrix") {
        spec.kind = CostKind::Matrix;
        const auto& rows = j.at("matrix");
        if (!rows.is_array() || rows.empty()) throw BadFileFormat(path + ": matrix rows");
        const auto n = rows.size(), m = rows[0].size();
        spec.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
        for (size_t i = 0; i < n; ++i) {
            if (rows[i].size() != m) throw BadFileFormat(path + ": ragged matrix");
            for (size_t jj = 0; jj < m; ++jj)
                spec.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jj)) =
                    rows[i][jj].get<double>();
        }
    } else if (kind == "squared_euclidean") {
        spec.kind = CostKind::SquaredEuclidean;
    } else if (kind == "euclidean") {
        spec.kind = CostKind::Euclidean;
    } else if (kind == "p_norm") {
        spec.kind = CostKind::PNorm;
        spec.p = j.at("p").get<double>();
    } else {
        throw BadFileFormat(path + ": unknown cost kind '" + kind + "'");
    }
    if (j.contains("lipschitz_L")) spec.lipschitz_L = j["lipschitz_L"].get<double>();
    return spec;
}

void save_cost_spec(const CostSpec& spec, const std::string& path) {
    json j;
    switch (spec.kind) {
        case CostKind::Matrix: {
            j["kind"] = "matrix";
            json rows = json::array();
            for (Eigen::Index i = 0; i < spec.matrix.rows(); ++i) {
                json row = json::array();
                for (Eigen::Index jj = 0; jj < spec.matrix.cols(); ++jj)
                    row.push_back(spec.matrix(i, jj));
                rows.push_back(row);
            }
            j["matrix"] = rows;
            break;
        }
        case CostKind::SquaredEuclidean:
            j["kind"] = "squared_euclidean";
            break;
        case CostKind::Euclidean:
            j["kind"] = "euclidean";
            break;
        case CostKind::PNorm:
            j["kind"] = "p_norm";
            j["p"] = spec.p;
            break;
        case CostKind::Custom:
            throw BadFileFormat("custom callables cannot be serialized");
    }
    if (spec.lipschitz_L) j["lipschitz_L"] = *spec.lipschitz_L;
    write_text_file(path, j.dump(2) + "\n");
}

Modulus load_modulus(const std::string& path) {
    const json j = read_json_file(path);
    const std::string form = j.value("form", "");
    const double c = j.value("coefficient", 1.0);
    if (!(c > 0.0)) throw BadFileFormat(path + ": coefficient must be positive");
    Modulus mod;
    mod.coordinatewise = j.value("coordinatewise", false);
    if (form == "linear") {
        mod.eval = [c](double r) { return c * r; };
        mod.inverse = [c](double s) { return s / c; };
    } else if (form == "power") {
        const double a = j.at("exponent").get<double>();
        if (!(a > 0.0)) throw BadFileFormat(path + ": exponent must be positive");
        mod.eval = [c, a](double r) { return c * std::pow(r, a); };
        mod.inverse = [c, a](double s) { return std::pow(s / c, 1.0 / a); };
    } else {
        throw BadFileFormat(path + ": unknown modulus form '" + form + "'");
    }
    return mod;
}

GeometryFile load_geometry(const std::string& path) {
    const json j = read_json_file(path);
    GeometryFile geo;
    geo.lambda_P = j.at("lambda_P").get<double>();
    geo.Lambda_P = j.at("Lambda_P").get<double>();
    geo.delta_P = j.at("delta_P").get<double>();
    if (j.contains("lipschitz_L")) geo.lipschitz_L = j["lipschitz_L"].get<double>();
    return geo;
}

DualPotentials load_potentials(const std::string& path) {
    const json j = read_json_file(path);
    if (!j.contains("f") || !j.contains("g"))
        throw BadFileFormat(path + ": potentials need f and g");
    DualPotentials pot;
    pot.f.resize(static_cast<Eigen::Index>(j["f"].size()));
    pot.g.resize(static_cast<Eigen::Index>(j["g"].size()));
    for (size_t i = 0; i < j["f"].size(); ++i)
        pot.f[static_cast<Eigen::Index>(i)] = j["f"][i].get<double>();
    for (size_t i = 0; i < j["g"].size(); ++i)
        pot.g[static_cast<Eigen::Index>(i)] = j["g"][i].get<double>();
    return pot;
}

void save_potentials(const DualPotentials& pot, const std::string& path) {
    json f = json::array(), g = json::array();
    for (Eigen::Index i = 0; i < pot.f.size(); ++i) f.push_back(pot.f[i]);
    for (Eigen::Index j = 0; j < pot.g.size(); ++j) g.push_back(pot.g[j]);
    write_text_file(path, json{{"f", f}, {"g", g}}.dump(2) + "\n");
}

void save_coupling(const Coupling& pi, const std::string& path) {
    std::string out = "i,j,mass\n";
    for (const auto& e : pi.entries)
        out += std::to_string(e.i) + "," + std::to_string(e.j) + "," +
               format_double(e.mass) + "\n";
    write_text_file(path, out);
}

Coupling load_coupling(const std::string& path, int n, int m) {
    std::ifstream in(path);
    if (!in) throw BadFileFormat("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "i,j,mass")
        throw BadFileFormat(path + ": coupling header must be i,j,mass");
    Coupling pi;
    pi.n = n;
    pi.m = m;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 3) throw BadFileFormat(path + ": coupling row width");
        const int i = static_cast<int>(parse_double(cells[0], path));
        const int j = static_cast<int>(parse_double(cells[1], path));
        if (i < 0 || i >= n || j < 0 || j >= m)
            throw BadFileFormat(path + ": coupling index out of range");
        pi.entries.push_back({i, j, parse_double(cells[2], path)});
    }
    return pi;
}

void save_trace(const ConvergenceTrace& trace, const std::string& path) {
    std::string out = "iter,objective,grad_l2,gap,sup_dist,l2_dist,pl_ratio\n";
    const auto opt = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string();
    };
    for (const auto& r : trace.rows) {
        out += std::to_string(r.iter) + "," + format_double(r.objective) + "," +
               format_double(r.grad_l2) + "," + opt(r.gap) + "," + opt(r.sup_dist) + "," +
               opt(r.l2_dist) + "," + opt(r.pl_ratio) + "\n";
    }
    write_text_file(path, out);
}

nlohmann::json constants_to_json(const PLConstants& c, const nlohmann::json& inputs) {
    const auto variant_name = [](PLVariant v) {
        switch (v) {
            case PLVariant::Lipschitz: return "lipschitz";
            case PLVariant::Modulus: return "modulus";
            case PLVariant::ConnectedLipschitz: return "connected_lipschitz";
        }
        return "";
    };
    return json{{"variant", variant_name(c.variant)}, {"kappa", c.kappa},
                {"alpha", c.alpha},                   {"beta_eps", c.beta_eps},
                {"gamma_eps", c.gamma_eps},           {"radius", c.radius},
                {"empirical", c.empirical},           {"inputs", inputs}};
}

nlohmann::json certificate_to_json(const CoercivityCertificate& cert) {
    json samples = json::array();
    for (const auto& s : cert.samples)
        samples.push_back(json{{"r", s.r},
                               {"lambda0", s.lambda0},
                               {"beta_eps", cert.beta_eps},
                               {"pass", s.pass},
                               {"phi_second", s.phi_second},
                               {"phi_bound_pass", s.phi_bound_pass}});
    return json{{"r0", cert.r0},
                {"samples", samples},
                {"min_lambda0", cert.min_lambda0},
                {"min_margin", cert.min_margin},
                {"all_pass", cert.all_pass}};
}

}  // namespace qot
