#pragma once

// Semidefinite programs in the "linear matrix inequality" form used by the
// analysis module:
//
//   minimize   sum_v <G_v, V_v>
//   subject to F_l(V) = C_l + sum_t s_t (L_t V_t R_t + (L_t V_t R_t)^T)  >= 0   (per block l)
//              sum_v <E_{e,v}, V_v> = f_e                                      (per equality e)
//
// Decision variables are symmetric (m x m) or general (p x q) matrices;
// scalars are 1 x 1 general variables. Each term is a rank-structured
// product, which lets the interior-point backend assemble its Schur
// complement without forming dense constraint matrices per coordinate.
//
// Internal coordinates: a symmetric variable stores its upper triangle
// column by column (V(a,b) = V(b,a) = y for a <= b); a general variable
// stores entries column-major.

#include "kronlyap/system.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kronlyap::sdp {

enum class VariableShape { symmetric, general };

struct VariableId {
    std::size_t index = 0;
};

struct BlockId {
    std::size_t index = 0;
};

// psd: F >= 0; nsd: F <= 0 (stored internally as -F >= 0).
enum class Sense { psd, nsd };

struct Variable {
    std::string name;
    VariableShape shape = VariableShape::general;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::size_t offset = 0; // first coordinate
    [[nodiscard]] std::size_t coordinate_count() const;
};

struct Term {
    std::size_t variable = 0;
    Matrix left;  // size x rows
    Matrix right; // cols x size
};

struct LmiBlock {
    std::string name;
    Eigen::Index size = 0;
    Sense sense = Sense::psd;
    Matrix constant; // as written by the caller (before sense flip)
    std::vector<Term> terms;
};

struct LinearForm {
    std::vector<std::pair<std::size_t, Matrix>> parts; // (variable, coefficient matrix)
};

struct Equality {
    std::string name;
    LinearForm form;
    double rhs = 0.0;
};

class SdpProblem {
public:
    VariableId add_symmetric(std::string name, Eigen::Index m);
    VariableId add_matrix(std::string name, Eigen::Index rows, Eigen::Index cols);
    VariableId add_scalar(std::string name) { return add_matrix(std::move(name), 1, 1); }

    // constant defaults to zero
    BlockId add_block(std::string name, Eigen::Index size, Sense sense, Matrix constant = Matrix());

    // Adds scale * (L V R + (L V R)^T) to the block.
    void add_term(BlockId block, VariableId var, Matrix left, Matrix right, double scale = 1.0);

    // Convenience: adds scale * V placed at rows/cols [at, at + m) of the block
    // (symmetric V), or a scalar variable at the (at, at) diagonal entry.
    void add_embedded(BlockId block, VariableId var, Eigen::Index at, double scale = 1.0);

    void add_equality(std::string name, LinearForm form, double rhs);

    // minimize <coefficient, V>; accumulates across calls.
    void add_objective(VariableId var, Matrix coefficient);

    [[nodiscard]] const std::vector<Variable>& variables() const noexcept { return variables_; }
    [[nodiscard]] const std::vector<LmiBlock>& blocks() const noexcept { return blocks_; }
    [[nodiscard]] const std::vector<Equality>& equalities() const noexcept { return equalities_; }
    [[nodiscard]] const LinearForm& objective() const noexcept { return objective_; }
    [[nodiscard]] bool has_objective() const noexcept { return !objective_.parts.empty(); }
    [[nodiscard]] std::size_t coordinate_count() const noexcept { return coordinates_; }
    [[nodiscard]] const Variable& variable(VariableId id) const { return variables_.at(id.index); }

    // Coordinate vector <-> per-variable matrices.
    [[nodiscard]] Matrix unpack(const Vector& y, std::size_t var) const;
    [[nodiscard]] Vector pack(const std::vector<Matrix>& values) const;

    // Evaluate block l at coordinates y, in the caller's sense (i.e. the
    // matrix that should be PSD for psd blocks, NSD for nsd blocks).
    [[nodiscard]] Matrix evaluate_block(std::size_t block, const std::vector<Matrix>& values) const;

    // Linear functional <coefficient, V> in coordinates.
    [[nodiscard]] Vector coordinates_of(const LinearForm& form) const;

private:
    void check_variable(std::size_t var) const;

    std::vector<Variable> variables_;
    std::vector<LmiBlock> blocks_;
    std::vector<Equality> equalities_;
    LinearForm objective_;
    std::size_t coordinates_ = 0;
};

enum class Status { optimal, feasible, infeasible, inaccurate, failed };

[[nodiscard]] std::string to_string(Status status);
// Inverse of to_string; throws std::invalid_argument.
[[nodiscard]] Status status_from_string(const std::string& s);

struct BlockResidual {
    std::string name;
    double min_eigenvalue = 0.0; // of the block in PSD orientation
};

struct Diagnostics {
    int iterations = 0;
    double primal_residual = 0.0; // ||g - F*(X) - E^T w|| / (1 + ||g|| + sum_l ||F_l*(X_l)||)
    double dual_residual = 0.0;   // ||C + F(y) - Z|| relative
    double equality_residual = 0.0;
    double gap = 0.0;             // <X, Z> / (1 + |primal obj| + |dual obj|)
    double max_violation = 0.0;   // independent verifier, max(-lambda_min) over blocks
    std::vector<BlockResidual> blocks;
    std::string message;
    std::vector<std::string> warnings;
};

struct SdpSolution {
    Status status = Status::failed;
    std::vector<Matrix> values; // one per variable
    double objective = 0.0;
    Diagnostics diagnostics;

    [[nodiscard]] bool usable() const noexcept { return status == Status::optimal || status == Status::feasible; }
    [[nodiscard]] const Matrix& value(VariableId id) const { return values.at(id.index); }
};

struct SolverSettings {
    double feas_tol = 1e-7;   // verifier tolerance on block eigenvalues
    double gap_tol = 1e-7;    // relative complementarity gap and residuals
    // Degenerate problems (non-unique optimal certificates) make the Schur
    // complement singular near the optimum; if progress stops, a best
    // iterate within this tolerance is still reported optimal, with a warning.
    double acceptable_tol = 1e-6;
    double infeas_tol = 1e-8; // ray residual for infeasibility certificates
    // When the iteration stalls, a ray proving that every feasible point has
    // |y| >= R is accepted as infeasibility if R exceeds this multiple of
    // the iterate size (1 + |y|).
    double infeas_radius_ratio = 1e3;
    int max_iterations = 100;
    double step_fraction = 0.95;
    double start_scale = 1.0; // multiplies the default starting X = xi I, Z = zeta I
    bool verbose = false;

    // feas_tol = gap_tol = tol; acceptable_tol is kept at least 10*tol.
    void set_tolerance(double tol);

    // Applies KRONLYAP_SOLVER_TOL through set_tolerance when it parses as a
    // positive number.
    [[nodiscard]] static SolverSettings from_environment();
};

class SdpBackend {
public:
    virtual ~SdpBackend() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual SdpSolution solve(const SdpProblem& problem, const SolverSettings& settings) const = 0;
};

// Primal-dual path-following method (HKM direction, Mehrotra
// predictor-corrector, infeasible start). Deterministic.
class InteriorPointBackend final : public SdpBackend {
public:
    [[nodiscard]] std::string name() const override { return "kronlyap-ipm"; }
    [[nodiscard]] SdpSolution solve(const SdpProblem& problem, const SolverSettings& settings) const override;
};

// Solve with the default backend; always followed by verify().
[[nodiscard]] SdpSolution solve(const SdpProblem& problem, const SolverSettings& settings = SolverSettings{});
[[nodiscard]] SdpSolution solve(const SdpProblem& problem, const SolverSettings& settings, const SdpBackend& backend);

// Independent check: substitutes the values back, eigen-decomposes every
// block and evaluates equality residuals. Returns max violation.
struct Verification {
    double max_violation = 0.0;
    double max_equality_residual = 0.0;
    std::vector<BlockResidual> blocks;
    [[nodiscard]] bool passes(double tol) const noexcept {
        return max_violation <= tol && max_equality_residual <= tol;
    }
};
[[nodiscard]] Verification verify(const SdpProblem& problem, const std::vector<Matrix>& values);

// Stability LMIs: P G_j + G_j^T P <= -eps I for all j and P >= eps_p I (or
// P >= lower_bound when given). No objective.
struct StabilityLmis {
    SdpProblem problem;
    VariableId p;
};
[[nodiscard]] StabilityLmis build_stability_lmis(const std::vector<Matrix>& generators, double eps, double eps_p = 1.0,
                                                 const std::optional<Matrix>& lower_bound = std::nullopt);

// Default strictness margin: 1e-6 * max_j ||G_j||_2.
[[nodiscard]] double default_margin(const std::vector<Matrix>& generators);

} // namespace kronlyap::sdp
