#pragma once

// Kronecker-product hierarchy: exact lifts of x' = A(t) x to
// xi_k = x (x) ... (x) x and the stacked state [xi_1; xi_2; ...; xi_i].

#include "kronlyap/system.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace kronlyap::lift {

// Block (r, c) of the result is a(r, c) * b.
[[nodiscard]] Matrix kron(const Matrix& a, const Matrix& b);

// (x)^1 a = a, (x)^k a = a (x) ((x)^{k-1} a). Throws std::invalid_argument for k < 1.
[[nodiscard]] Matrix kron_power(const Matrix& a, int k);
[[nodiscard]] Vector kron_power(const Vector& v, int k);
[[nodiscard]] RowVector kron_power(const RowVector& v, int k);

// n + n^2 + ... + n^i.
[[nodiscard]] std::size_t lifted_dimension(std::size_t n, int level);

[[nodiscard]] Matrix block_diagonal(std::span<const Matrix> blocks);

// Generator of the homogeneous hierarchy:
//   A^1 = A,  A^k = I_n (x) A^{k-1} + A (x) I_{n^{k-1}}.
// The spectrum of A^k is the set of all k-fold sums of eigenvalues of A.
[[nodiscard]] Matrix lift_generator(const Matrix& a, int level);

// A^1, ..., A^level computed bottom-up (each level reuses the previous one).
[[nodiscard]] std::vector<Matrix> lift_generator_chain(const Matrix& a, int level);

// diag(A^1, ..., A^level).
[[nodiscard]] Matrix lift_tilde_generator(const Matrix& a, int level);

struct LiftedState {
    int level = 0;
    std::size_t full_dim = 0;
    Vector vector;
};

// [x; x(x)x; ...; (x)^level x].
[[nodiscard]] LiftedState lift_state(const Vector& x, int level);

struct LiftedIO {
    int level = 0;
    Vector b;    // [b; (x)^2 b; ...]
    RowVector c; // [c, (x)^2 c, ...]
};

[[nodiscard]] LiftedIO lift_io(const Vector& b, const RowVector& c, int level);

struct LiftedUncertainty {
    std::vector<Matrix> blocks; // D^1 .. D^level
    Matrix tilde;               // diag(D^1, ..., D^level)
};

// Same recursion as the generators: D^1 = Delta, D^k = I (x) D^{k-1} + Delta (x) I.
[[nodiscard]] LiftedUncertainty lift_uncertainty(const Matrix& delta, int level);

// Lifted generators for every mode of a system.
struct LiftedGenerators {
    int level = 0;
    std::vector<std::vector<Matrix>> blocks; // blocks[j][k-1] = A^k_j
    std::vector<Matrix> tilde;               // tilde[j] = diag(A^1_j, ..., A^level_j)
    std::optional<LiftedUncertainty> uncertainty;

    [[nodiscard]] Eigen::Index dimension() const { return tilde.empty() ? 0 : tilde.front().rows(); }
};

[[nodiscard]] LiftedGenerators lift_system(const SwitchedLinearSystem& system, int level);

} // namespace kronlyap::lift
