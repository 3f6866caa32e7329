#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace kronlyap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Affine parametric uncertainty A(t) = nominal + lambda(t) * delta with
// lambda(t) in [lo, hi].
struct Uncertainty {
    Matrix nominal;
    Matrix delta;
    double lo = -1.0;
    double hi = 1.0;
};

// x' = A(t) x with A(t) in conv{A_1, ..., A_N}, optionally with a single
// input vector b and output row c (impulse-response analysis).
//
// Immutable after construction. When an uncertainty description is attached
// the vertex list is exactly {nominal + hi*delta, nominal + lo*delta}.
class SwitchedLinearSystem {
public:
    explicit SwitchedLinearSystem(std::vector<Matrix> modes,
                                  std::optional<Vector> input_b = std::nullopt,
                                  std::optional<RowVector> output_c = std::nullopt);

    static SwitchedLinearSystem from_uncertainty(Uncertainty uncertainty,
                                                 std::optional<Vector> input_b = std::nullopt,
                                                 std::optional<RowVector> output_c = std::nullopt);

    [[nodiscard]] Eigen::Index dimension() const noexcept { return n_; }
    [[nodiscard]] std::size_t mode_count() const noexcept { return modes_.size(); }
    [[nodiscard]] const std::vector<Matrix>& modes() const noexcept { return modes_; }
    [[nodiscard]] const Matrix& mode(std::size_t j) const { return modes_.at(j); }

    [[nodiscard]] const std::optional<Vector>& input_b() const noexcept { return b_; }
    [[nodiscard]] const std::optional<RowVector>& output_c() const noexcept { return c_; }
    [[nodiscard]] const std::optional<Uncertainty>& uncertainty() const noexcept { return uncertainty_; }

    [[nodiscard]] bool has_io() const noexcept { return b_.has_value() && c_.has_value(); }

    // A(lambda) = nominal + lambda * delta; requires an uncertainty description.
    [[nodiscard]] Matrix uncertain_matrix(double lambda) const;

private:
    Eigen::Index n_ = 0;
    std::vector<Matrix> modes_;
    std::optional<Vector> b_;
    std::optional<RowVector> c_;
    std::optional<Uncertainty> uncertainty_;
};

} // namespace kronlyap
