#pragma once

// Certificates built on the lifted hierarchy: stability, reachable-set outer
// approximations, impulse-peak bounds, worst-case switching and S-procedure
// invariant sets.
//
// Everything can be done in full Kronecker coordinates (dimension
// n + ... + n^i) or in reduced monomial coordinates (see reduction.hpp).
// Certificates remember which, together with n and the level, so they can be
// evaluated at base states without further context.

#include "kronlyap/reduction.hpp"
#include "kronlyap/sdp.hpp"
#include "kronlyap/system.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kronlyap::analysis {

enum class Coordinates { full, reduced };

[[nodiscard]] std::string to_string(Coordinates c);
// "full" / "reduced"; throws std::invalid_argument otherwise.
[[nodiscard]] Coordinates coordinates_from_string(const std::string& s);

// Maps base states to lifted states of one level/coordinate system.
class StateLift {
public:
    StateLift(std::size_t n, int level, Coordinates coordinates);

    [[nodiscard]] Vector operator()(const Vector& x) const;
    // c~ such that c~ xi~(x) = sum_k ((c x)^k), optionally with (-1)^k signs.
    [[nodiscard]] RowVector output_row(const RowVector& c, bool alternate = false) const;
    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] int level() const noexcept { return level_; }
    [[nodiscard]] Coordinates coordinates() const noexcept { return coordinates_; }
    [[nodiscard]] Eigen::Index dimension() const noexcept { return dimension_; }

private:
    std::size_t n_;
    int level_;
    Coordinates coordinates_;
    Eigen::Index dimension_ = 0;
    std::vector<reduction::ReductionMap> maps_; // reduced only
};

// The hierarchy at one level in the chosen coordinates.
struct LiftedModel {
    int level = 0;
    std::size_t n = 0;
    Coordinates coordinates = Coordinates::reduced;
    std::vector<Matrix> generators;    // one per mode
    std::optional<Matrix> uncertainty; // lifted Delta, if the system has one
    Matrix gram;                       // W~^T W~ (reduced) or I (full)
    Matrix to_full;                    // W~ (reduced) or I (full)

    [[nodiscard]] Eigen::Index dimension() const { return gram.rows(); }
    [[nodiscard]] StateLift lift() const { return StateLift(n, level, coordinates); }
    [[nodiscard]] Vector lift_input(const Vector& b) const;       // b~ in these coordinates
    [[nodiscard]] RowVector lift_output(const RowVector& c) const; // c~ in these coordinates
};

[[nodiscard]] LiftedModel build_model(const SwitchedLinearSystem& system, int level, Coordinates coordinates);

// Condensed solver outcome carried by certificates.
struct SolveReport {
    sdp::Status status = sdp::Status::failed;
    std::string backend;
    int iterations = 0;
    double objective = 0.0;
    double max_violation = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    std::string message;
    std::vector<std::string> warnings;
};

struct QuadraticCertificate {
    int level = 0;
    std::size_t n = 0;
    Coordinates coordinates = Coordinates::reduced;
    Matrix p;
    double margin = 0.0;    // decay margin used in the LMIs
    std::string provenance; // "stability", "reach", "impulse", "product"
    SolveReport solver;

    [[nodiscard]] Eigen::Index dimension() const { return p.rows(); }
};

struct AnalysisOptions {
    Coordinates coordinates = Coordinates::reduced;
    std::optional<double> margin; // default: sdp::default_margin of the generators
    double positivity = 1.0;      // P >= positivity * I in check_stability
    sdp::SolverSettings solver = sdp::SolverSettings::from_environment();
};

enum class Verdict { certified, infeasible, failed };

[[nodiscard]] std::string to_string(Verdict v);

template <class T>
struct Outcome {
    Verdict verdict = Verdict::failed;
    std::optional<T> value;
    SolveReport solver;

    [[nodiscard]] bool ok() const noexcept { return verdict == Verdict::certified && value.has_value(); }
};

// Residuals of a quadratic certificate against a model: for every mode the
// largest eigenvalue of P G + G^T P (raw) and of P G + G^T P + margin*I.
struct CertificateCheck {
    std::vector<double> decay;          // raw, per mode
    std::vector<double> decay_margined; // per mode
    double min_eigenvalue = 0.0;        // of P

    [[nodiscard]] bool passes(double tol) const;
};

[[nodiscard]] CertificateCheck check_certificate(const LiftedModel& model, const Matrix& p, double margin = 0.0);

// Lyapunov LMIs on the lifted system: P G_j + G_j^T P <= -eps I, P >= positivity * I.
[[nodiscard]] Outcome<QuadraticCertificate> check_stability(const SwitchedLinearSystem& system, int level,
                                                            const AnalysisOptions& options = {});

// diag(P_1, P_1 (x) P_1, ..., (x)^level P_1) in full coordinates, or its
// restriction W~^T (.) W~ in reduced coordinates.
[[nodiscard]] QuadraticCertificate product_certificate(const Matrix& p1, int level, Coordinates coordinates);

// Reachable-set outer approximation from x0.
enum class ReachNormalization {
    identity, // V(x) >= sum_k |(x)^k x|^2, i.e. P >= I (full) / P >= W~^T W~ (reduced)
    trace     // trace(P) = dimension, P >= 0
};
[[nodiscard]] std::string to_string(ReachNormalization n);
[[nodiscard]] ReachNormalization reach_normalization_from_string(const std::string& s);

struct ReachResult {
    QuadraticCertificate certificate;
    ReachNormalization normalization = ReachNormalization::identity;
    Vector x0;
    double level_value = 0.0; // V(x0): the set is {x : V(x) <= level_value}
};

[[nodiscard]] Outcome<ReachResult> reach_certificate(const SwitchedLinearSystem& system, const Vector& x0, int level,
                                                     ReachNormalization normalization = ReachNormalization::identity,
                                                     const AnalysisOptions& options = {});

// V(x) = xi~(x)^T P xi~(x).
[[nodiscard]] double level_value(const QuadraticCertificate& cert, const Vector& x);

// Impulse certificate: minimize c~ Q^{-1} c~^T subject to the decay LMIs and
// b~^T Q b~ <= 1, through the epigraph [[t, c~], [c~^T, Q]] >= 0.
[[nodiscard]] Outcome<QuadraticCertificate> impulse_certificate(const SwitchedLinearSystem& system, int level,
                                                                const AnalysisOptions& options = {});

struct PeakBound {
    double lifted = 0.0; // bound on |c~ xi~(t)|
    double bound = 0.0;  // unique positive root of p + ... + p^level = lifted
};

struct PeakBoundResult {
    int level = 0;
    PeakBound nominal;                    // with c~ = [c, (x)^2 c, ...]
    std::optional<PeakBound> sign_robust; // max over c~ and [-c, (x)^2 c, -(x)^3 c, ...]
    std::vector<std::string> warnings;

    // The sign-robust bound when available, else the nominal one.
    [[nodiscard]] double guaranteed() const noexcept { return sign_robust ? sign_robust->bound : nominal.bound; }
};

// sqrt(c~ P^{-1} c~^T) * sqrt(b~^T P b~), followed by root extraction.
[[nodiscard]] PeakBoundResult peak_bound(const QuadraticCertificate& cert, const Vector& b, const RowVector& c,
                                         bool sign_robust = true);

// The positive root of p + p^2 + ... + p^level = value (value > 0).
[[nodiscard]] double unique_positive_root(double value, int level);

// Vertex of [lo, hi] maximizing d/dt V, i.e. the sign of
// xi^T (P D + D^T P) xi; ties go to hi.
[[nodiscard]] double worst_case_mode(const Matrix& p, const Matrix& lifted_delta, const Vector& xi, double lo = -1.0,
                                     double hi = 1.0);

// S-procedure invariant sets: V(x) = [xi; 1]^T [[P, q], [q^T, r]] [xi; 1].
struct AugmentedCertificate {
    int level = 0;
    std::size_t n = 0;
    Coordinates coordinates = Coordinates::reduced;
    Matrix p;
    Vector q;
    double r = -1.0;
    double lambda = 0.0;
    double margin = 0.0;
    std::string normalization; // e.g. "r=-1, anchored"
    Vector anchor;
    SolveReport solver;

    [[nodiscard]] double value(const Vector& x) const;
};

// [[P G + G^T P + lambda P, G^T q + lambda q], [q^T G + lambda q^T, lambda r]].
[[nodiscard]] Matrix augmented_matrix(const Matrix& p, const Vector& q, double r, const Matrix& generator,
                                      double lambda);

struct InvariantOptions {
    double lambda = 0.0;
    double r = -1.0; // fixed scaling of the affine part
};

// For lambda = 0 the corner lambda*r vanishes, which forces q = 0; the
// program then pins q = 0 and keeps only the P block.
[[nodiscard]] Outcome<AugmentedCertificate> invariant_certificate(const SwitchedLinearSystem& system, int level,
                                                                  const Vector& anchor,
                                                                  const InvariantOptions& invariant = {},
                                                                  const AnalysisOptions& options = {});

// Reusable evaluator for either kind of certificate (avoids rebuilding the
// reduction maps per call): xi^T P xi (+ 2 q^T xi + r).
class LevelFunction {
public:
    explicit LevelFunction(const QuadraticCertificate& cert);
    explicit LevelFunction(const AugmentedCertificate& cert);
    [[nodiscard]] double operator()(const Vector& x) const;
    [[nodiscard]] double at_lifted(const Vector& xi) const;
    [[nodiscard]] const StateLift& lift() const noexcept { return lift_; }

private:
    StateLift lift_;
    Matrix p_;
    Vector q_;
    double r_ = 0.0;
};

struct LambdaSweepEntry {
    double lambda = 0.0;
    Verdict verdict = Verdict::failed;
};

// Default grid: -0.5, -0.45, ..., 0.5.
[[nodiscard]] std::vector<double> default_lambda_grid();
[[nodiscard]] std::vector<LambdaSweepEntry> sweep_lambda(const SwitchedLinearSystem& system, int level,
                                                         const Vector& anchor, const std::vector<double>& grid,
                                                         const AnalysisOptions& options = {});

} // namespace kronlyap::analysis
