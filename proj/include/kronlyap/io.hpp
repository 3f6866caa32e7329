#pragma once

// File formats: system descriptions and certificates (JSON), trajectories
// and contours (CSV).
//
// System file:
//   { "n": 2,
//     "modes": [ [[a11, a12], [a21, a22]], ... ],        // row-major
//     "input_b": [b1, b2], "output_c": [c1, c2],          // optional
//     "uncertainty": { "nominal": [[...]], "delta": [[...]],
//                      "range": [lo, hi] } }              // instead of modes
//
// Certificates are written with a fixed key order and shortest round-trip
// number formatting, so write -> read -> write is byte-identical.

#include "kronlyap/analysis.hpp"
#include "kronlyap/sim.hpp"
#include "kronlyap/system.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace kronlyap::io {

// Malformed input. what() names the line/column or the offending field.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] SwitchedLinearSystem parse_system(const std::string& text);
[[nodiscard]] SwitchedLinearSystem load_system(const std::filesystem::path& path);
[[nodiscard]] std::string write_system(const SwitchedLinearSystem& system);

// "kronecker" for full coordinates, "colex-monomial" for reduced ones.
[[nodiscard]] std::string ordering_tag(analysis::Coordinates c);

struct ReachInfo {
    Vector x0;
    double level_value = 0.0;
    analysis::ReachNormalization normalization = analysis::ReachNormalization::identity;
};

struct CertificateDocument {
    std::variant<analysis::QuadraticCertificate, analysis::AugmentedCertificate> certificate;
    std::optional<ReachInfo> reach;
};

[[nodiscard]] std::string write_certificate(const CertificateDocument& doc);
[[nodiscard]] CertificateDocument parse_certificate(const std::string& text);
[[nodiscard]] CertificateDocument load_certificate(const std::filesystem::path& path);

// 17 significant digits ("%.17g").
[[nodiscard]] std::string format_double(double v);

// Columns t, x1..xn, y, V, mode; y and V are left empty when absent.
[[nodiscard]] std::string trajectory_csv(const sim::TrajectoryRecord& record);

// Columns x1, x2, segment_id (0-based, one id per polyline).
[[nodiscard]] std::string contour_csv(const std::vector<sim::Polyline>& curves);

// Reads a whole file; throws std::runtime_error if it cannot be opened.
[[nodiscard]] std::string read_text(const std::filesystem::path& path);
// Writes a whole file, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace kronlyap::io
