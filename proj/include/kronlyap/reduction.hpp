#pragma once

// Removal of duplicate monomial coordinates from Kronecker powers.
//
// (x)^k x has n^k entries but only C(n+k-1, k) distinct monomials. The
// reduction matrix W_k (n^k x m, 0/1) maps the distinct monomials eta_k back
// to the Kronecker coordinates: (x)^k x = W_k eta_k.
//
// Monomial ordering: each monomial is a sorted multi-index a_1 <= ... <= a_k
// over {0..n-1}; columns are ordered colexicographically (compare a_k first,
// then a_{k-1}, ...). For n = 2, k = 2 this gives x1^2, x1 x2, x2^2.

#include "kronlyap/lift.hpp"
#include "kronlyap/system.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace kronlyap::reduction {

using MultiIndex = std::vector<int>;

// C(n + k - 1, k)
[[nodiscard]] std::size_t monomial_count(std::size_t n, int k);

struct ReductionMap {
    std::size_t n = 0;
    int k = 0;
    std::vector<MultiIndex> monomials;         // column order
    std::vector<std::size_t> position_monomial; // Kronecker position -> column
    std::vector<double> multiplicity;          // diag(W^T W)
    Matrix w;                                  // n^k x m
    Matrix w_plus;                             // m x n^k, (W^T W)^{-1} W^T

    [[nodiscard]] std::size_t size() const noexcept { return monomials.size(); }
};

[[nodiscard]] ReductionMap build_reduction(std::size_t n, int k);

// Distinct monomials of x of degree k, in column order of build_reduction(n, k).
[[nodiscard]] Vector monomials(const Vector& x, const ReductionMap& map);

// W^+ A^k W, the generator of eta_k. Throws on dimension mismatch.
[[nodiscard]] Matrix reduce_generator(const Matrix& lifted_generator, const ReductionMap& map);

// Generator of eta_k built directly from A without forming the n^k x n^k
// matrix: d/dt of a monomial replaces one factor x_a by (A x)_a.
[[nodiscard]] Matrix reduced_generator_direct(const Matrix& a, const ReductionMap& map);

// Reduced version of the stacked hierarchy: eta~ = [eta_1; ...; eta_i].
struct TildeReduction {
    int level = 0;
    std::size_t n = 0;
    std::vector<ReductionMap> maps;  // k = 1..level
    Matrix w_tilde;                  // diag(W_1, ..., W_i)
    Matrix w_tilde_plus;             // diag(W_1^+, ..., W_i^+)
    std::vector<Matrix> generators;  // per mode, diag(W_k^+ A^k_j W_k)
    std::optional<Matrix> uncertainty; // diag(W_k^+ D^k W_k) when present

    [[nodiscard]] Eigen::Index dimension() const { return w_tilde.cols(); }
    [[nodiscard]] Eigen::Index full_dimension() const { return w_tilde.rows(); }

    // W~^+ lift_state(x, level), computed from monomials directly.
    [[nodiscard]] Vector reduce_state(const Vector& x) const;
    [[nodiscard]] Vector expand(const Vector& eta) const { return w_tilde * eta; }
    [[nodiscard]] Vector reduce(const Vector& xi) const { return w_tilde_plus * xi; }
};

// For n = 2, level i the reduced dimension is i(i+3)/2.
[[nodiscard]] TildeReduction reduce_tilde(const SwitchedLinearSystem& system, int level);

} // namespace kronlyap::reduction
