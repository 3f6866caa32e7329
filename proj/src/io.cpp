#include "kronlyap/io.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace kronlyap::io {

using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kCertificateFormat = "kronlyap-certificate";
constexpr int kCertificateVersion = 1;

[[noreturn]] void fail(const std::string& field, const std::string& message) {
    throw FormatError("field '" + field + "': " + message);
}

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        // e.what() carries "at line L, column C"
        throw FormatError(std::string("invalid JSON: ") + e.what());
    }
}

const Json& require(const Json& obj, const std::string& key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing");
    return *it;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double number(const Json& j, const std::string& field) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN(); // written for non-finite values
    if (!j.is_number()) fail(field, "expected a number");
    return j.get<double>();
}

double finite_number(const Json& j, const std::string& field) {
    if (!j.is_number()) fail(field, "expected a number");
    return j.get<double>();
}

std::size_t positive_integer(const Json& j, const std::string& field) {
    if (!j.is_number_integer() || j.get<long long>() < 1) fail(field, "expected a positive integer");
    return static_cast<std::size_t>(j.get<long long>());
}

Vector vector_of(const Json& j, std::size_t n, const std::string& field, bool allow_null = false) {
    if (!j.is_array()) fail(field, "expected an array of " + std::to_string(n) + " numbers");
    if (j.size() != n) fail(field, "expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const std::string f = field + "[" + std::to_string(k) + "]";
        v(static_cast<Eigen::Index>(k)) = allow_null ? number(j[k], f) : finite_number(j[k], f);
    }
    return v;
}

Matrix matrix_of(const Json& j, std::size_t rows, std::size_t cols, const std::string& field,
                 bool allow_null = false) {
    if (!j.is_array()) fail(field, "expected an array of " + std::to_string(rows) + " rows");
    if (j.size() != rows) fail(field, "expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        m.row(static_cast<Eigen::Index>(r)) =
            vector_of(j[r], cols, field + "[" + std::to_string(r) + "]", allow_null).transpose();
    }
    return m;
}

Json number_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vector_json(const Eigen::Ref<const Vector>& v) {
    Json a = Json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(number_json(v(k)));
    return a;
}

Json matrix_json(const Matrix& m) {
    Json a = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r).transpose()));
    return a;
}

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& path) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) fail(join(path, key), "unknown field");
    }
}

Json solver_json(const analysis::SolveReport& s) {
    Json j;
    j["status"] = sdp::to_string(s.status);
    j["backend"] = s.backend;
    j["iterations"] = s.iterations;
    j["objective"] = number_json(s.objective);
    j["max_violation"] = number_json(s.max_violation);
    j["primal_residual"] = number_json(s.primal_residual);
    j["dual_residual"] = number_json(s.dual_residual);
    j["gap"] = number_json(s.gap);
    j["message"] = s.message;
    j["warnings"] = s.warnings;
    return j;
}

std::string string_of(const Json& j, const std::string& field) {
    if (!j.is_string()) fail(field, "expected a string");
    return j.get<std::string>();
}

analysis::SolveReport solver_of(const Json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    analysis::SolveReport s;
    try {
        s.status = sdp::status_from_string(string_of(require(j, "status", path), join(path, "status")));
    } catch (const std::invalid_argument& e) {
        fail(join(path, "status"), e.what());
    }
    s.backend = string_of(require(j, "backend", path), join(path, "backend"));
    const Json& it = require(j, "iterations", path);
    if (!it.is_number_integer()) fail(join(path, "iterations"), "expected an integer");
    s.iterations = it.get<int>();
    s.objective = number(require(j, "objective", path), join(path, "objective"));
    s.max_violation = number(require(j, "max_violation", path), join(path, "max_violation"));
    s.primal_residual = number(require(j, "primal_residual", path), join(path, "primal_residual"));
    s.dual_residual = number(require(j, "dual_residual", path), join(path, "dual_residual"));
    s.gap = number(require(j, "gap", path), join(path, "gap"));
    s.message = string_of(require(j, "message", path), join(path, "message"));
    const Json& w = require(j, "warnings", path);
    if (!w.is_array()) fail(join(path, "warnings"), "expected an array of strings");
    for (std::size_t k = 0; k < w.size(); ++k) {
        s.warnings.push_back(string_of(w[k], join(path, "warnings") + "[" + std::to_string(k) + "]"));
    }
    return s;
}

} // namespace

SwitchedLinearSystem parse_system(const std::string& text) {
    const Json root = parse_json(text);
    if (!root.is_object()) throw FormatError("system file must be a JSON object");
    check_keys(root, {"n", "modes", "input_b", "output_c", "uncertainty", "name", "description"}, "");
    const std::size_t n = positive_integer(require(root, "n", ""), "n");

    std::optional<Vector> b;
    std::optional<RowVector> c;
    if (root.contains("input_b")) b = vector_of(root["input_b"], n, "input_b");
    if (root.contains("output_c")) c = vector_of(root["output_c"], n, "output_c").transpose();

    const bool has_modes = root.contains("modes");
    const bool has_uncertainty = root.contains("uncertainty");
    if (has_modes == has_uncertainty) fail("modes", "give exactly one of 'modes' and 'uncertainty'");

    if (has_uncertainty) {
        const Json& u = root["uncertainty"];
        if (!u.is_object()) fail("uncertainty", "expected an object");
        check_keys(u, {"nominal", "delta", "range"}, "uncertainty");
        Uncertainty unc;
        unc.nominal = matrix_of(require(u, "nominal", "uncertainty"), n, n, "uncertainty.nominal");
        unc.delta = matrix_of(require(u, "delta", "uncertainty"), n, n, "uncertainty.delta");
        if (u.contains("range")) {
            const Vector r = vector_of(u["range"], 2, "uncertainty.range");
            if (!(r(0) < r(1))) fail("uncertainty.range", "expected [lo, hi] with lo < hi");
            unc.lo = r(0);
            unc.hi = r(1);
        }
        return SwitchedLinearSystem::from_uncertainty(std::move(unc), b, c);
    }

    const Json& modes = root["modes"];
    if (!modes.is_array() || modes.empty()) fail("modes", "expected a non-empty array of matrices");
    std::vector<Matrix> ms;
    for (std::size_t j = 0; j < modes.size(); ++j) {
        ms.push_back(matrix_of(modes[j], n, n, "modes[" + std::to_string(j) + "]"));
    }
    return SwitchedLinearSystem(std::move(ms), b, c);
}

SwitchedLinearSystem load_system(const std::filesystem::path& path) {
    try {
        return parse_system(read_text(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string write_system(const SwitchedLinearSystem& system) {
    Json root;
    root["n"] = system.dimension();
    if (const auto& u = system.uncertainty()) {
        Json uj;
        uj["nominal"] = matrix_json(u->nominal);
        uj["delta"] = matrix_json(u->delta);
        uj["range"] = Json::array({u->lo, u->hi});
        root["uncertainty"] = uj;
    } else {
        Json modes = Json::array();
        for (const auto& m : system.modes()) modes.push_back(matrix_json(m));
        root["modes"] = modes;
    }
    if (system.input_b()) root["input_b"] = vector_json(*system.input_b());
    if (system.output_c()) root["output_c"] = vector_json(system.output_c()->transpose());
    return root.dump(2) + "\n";
}

std::string ordering_tag(analysis::Coordinates c) {
    return c == analysis::Coordinates::full ? "kronecker" : "colex-monomial";
}

std::string write_certificate(const CertificateDocument& doc) {
    Json root;
    root["format"] = kCertificateFormat;
    root["version"] = kCertificateVersion;
    std::visit(
        [&](const auto& cert) {
            using T = std::decay_t<decltype(cert)>;
            constexpr bool augmented = std::is_same_v<T, analysis::AugmentedCertificate>;
            root["kind"] = augmented ? "augmented" : "quadratic";
            root["n"] = cert.n;
            root["level"] = cert.level;
            root["coordinates"] = analysis::to_string(cert.coordinates);
            root["ordering"] = ordering_tag(cert.coordinates);
            root["dimension"] = cert.p.rows();
            root["margin"] = number_json(cert.margin);
            if constexpr (augmented) {
                root["lambda"] = number_json(cert.lambda);
                root["r"] = number_json(cert.r);
                root["normalization"] = cert.normalization;
                root["anchor"] = vector_json(cert.anchor);
            } else {
                root["provenance"] = cert.provenance;
            }
            root["P"] = matrix_json(cert.p);
            if constexpr (augmented) root["q"] = vector_json(cert.q);
            root["solver"] = solver_json(cert.solver);
        },
        doc.certificate);
    if (doc.reach) {
        Json r;
        r["x0"] = vector_json(doc.reach->x0);
        r["level_value"] = number_json(doc.reach->level_value);
        r["normalization"] = analysis::to_string(doc.reach->normalization);
        root["reach"] = r;
    }
    return root.dump(2) + "\n";
}

CertificateDocument parse_certificate(const std::string& text) {
    const Json root = parse_json(text);
    if (!root.is_object()) throw FormatError("certificate file must be a JSON object");
    if (string_of(require(root, "format", ""), "format") != kCertificateFormat) {
        fail("format", std::string("expected \"") + kCertificateFormat + "\"");
    }
    const Json& version = require(root, "version", "");
    if (!version.is_number_integer() || version.get<int>() != kCertificateVersion) {
        fail("version", "unsupported version");
    }
    const std::string kind = string_of(require(root, "kind", ""), "kind");
    if (kind != "quadratic" && kind != "augmented") fail("kind", "expected \"quadratic\" or \"augmented\"");
    const bool augmented = kind == "augmented";

    const std::size_t n = positive_integer(require(root, "n", ""), "n");
    const std::size_t level = positive_integer(require(root, "level", ""), "level");
    analysis::Coordinates coords{};
    try {
        coords = analysis::coordinates_from_string(string_of(require(root, "coordinates", ""), "coordinates"));
    } catch (const std::invalid_argument& e) {
        fail("coordinates", e.what());
    }
    if (string_of(require(root, "ordering", ""), "ordering") != ordering_tag(coords)) {
        fail("ordering", "expected \"" + ordering_tag(coords) + "\" for " + analysis::to_string(coords) +
                             " coordinates");
    }
    const analysis::StateLift lift(n, static_cast<int>(level), coords);
    const auto dim = static_cast<std::size_t>(lift.dimension());
    if (positive_integer(require(root, "dimension", ""), "dimension") != dim) {
        fail("dimension", "expected " + std::to_string(dim) + " for this n, level and coordinate system");
    }
    const double margin = number(require(root, "margin", ""), "margin");
    const Matrix p = matrix_of(require(root, "P", ""), dim, dim, "P", true);
    const analysis::SolveReport solver = solver_of(require(root, "solver", ""), "solver");

    CertificateDocument doc;
    if (augmented) {
        check_keys(root, {"format", "version", "kind", "n", "level", "coordinates", "ordering", "dimension",
                          "margin", "lambda", "r", "normalization", "anchor", "P", "q", "solver", "reach"},
                   "");
        analysis::AugmentedCertificate a;
        a.n = n;
        a.level = static_cast<int>(level);
        a.coordinates = coords;
        a.p = p;
        a.q = vector_of(require(root, "q", ""), dim, "q", true);
        a.r = number(require(root, "r", ""), "r");
        a.lambda = number(require(root, "lambda", ""), "lambda");
        a.margin = margin;
        a.normalization = string_of(require(root, "normalization", ""), "normalization");
        a.anchor = vector_of(require(root, "anchor", ""), n, "anchor");
        a.solver = solver;
        doc.certificate = std::move(a);
    } else {
        check_keys(root, {"format", "version", "kind", "n", "level", "coordinates", "ordering", "dimension",
                          "margin", "provenance", "P", "solver", "reach"},
                   "");
        analysis::QuadraticCertificate q;
        q.n = n;
        q.level = static_cast<int>(level);
        q.coordinates = coords;
        q.p = p;
        q.margin = margin;
        q.provenance = string_of(require(root, "provenance", ""), "provenance");
        q.solver = solver;
        doc.certificate = std::move(q);
    }
    if (root.contains("reach")) {
        const Json& r = root["reach"];
        if (!r.is_object()) fail("reach", "expected an object");
        check_keys(r, {"x0", "level_value", "normalization"}, "reach");
        ReachInfo info;
        info.x0 = vector_of(require(r, "x0", "reach"), n, "reach.x0");
        info.level_value = number(require(r, "level_value", "reach"), "reach.level_value");
        try {
            info.normalization =
                analysis::reach_normalization_from_string(string_of(require(r, "normalization", "reach"),
                                                                    "reach.normalization"));
        } catch (const std::invalid_argument& e) {
            fail("reach.normalization", e.what());
        }
        doc.reach = std::move(info);
    }
    return doc;
}

CertificateDocument load_certificate(const std::filesystem::path& path) {
    try {
        return parse_certificate(read_text(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trajectory_csv(const sim::TrajectoryRecord& record) {
    const Eigen::Index n = record.states.empty() ? 0 : record.states.front().size();
    std::string out = "t";
    for (Eigen::Index k = 1; k <= n; ++k) out += ",x" + std::to_string(k);
    out += ",y,V,mode\n";
    for (std::size_t s = 0; s < record.size(); ++s) {
        out += format_double(record.times[s]);
        for (Eigen::Index k = 0; k < n; ++k) out += "," + format_double(record.states[s](k));
        out += ",";
        if (s < record.outputs.size()) out += format_double(record.outputs[s]);
        out += ",";
        if (s < record.values.size()) out += format_double(record.values[s]);
        out += ",";
        if (s < record.signal.size()) out += format_double(record.signal[s]);
        out += "\n";
    }
    return out;
}

std::string contour_csv(const std::vector<sim::Polyline>& curves) {
    std::string out = "x1,x2,segment_id\n";
    for (std::size_t id = 0; id < curves.size(); ++id) {
        for (const auto& p : curves[id].points) {
            out += format_double(p.x()) + "," + format_double(p.y()) + "," + std::to_string(id) + "\n";
        }
    }
    return out;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("error while writing " + path.string());
}

} // namespace kronlyap::io
