#include "kronlyap/reduction.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace kronlyap::reduction {

namespace {

bool colex_less(const MultiIndex& a, const MultiIndex& b) {
    return std::lexicographical_compare(a.rbegin(), a.rend(), b.rbegin(), b.rend());
}

void sorted_sequences(std::size_t n, int k, int start, MultiIndex& current, std::vector<MultiIndex>& out) {
    if (static_cast<int>(current.size()) == k) {
        out.push_back(current);
        return;
    }
    for (int a = start; a < static_cast<int>(n); ++a) {
        current.push_back(a);
        sorted_sequences(n, k, a, current, out);
        current.pop_back();
    }
}

} // namespace

std::size_t monomial_count(std::size_t n, int k) {
    if (n < 1 || k < 1) {
        throw std::invalid_argument("monomial_count needs n >= 1 and k >= 1");
    }
    // C(n+k-1, k) computed incrementally; exact for the sizes used here.
    std::size_t result = 1;
    for (std::size_t j = 1; j <= static_cast<std::size_t>(k); ++j) {
        result = result * (n - 1 + j) / j;
    }
    return result;
}

ReductionMap build_reduction(std::size_t n, int k) {
    if (n < 1 || k < 1) {
        throw std::invalid_argument("build_reduction needs n >= 1 and k >= 1");
    }
    ReductionMap map;
    map.n = n;
    map.k = k;

    MultiIndex scratch;
    sorted_sequences(n, k, 0, scratch, map.monomials);
    std::sort(map.monomials.begin(), map.monomials.end(), colex_less);

    std::map<MultiIndex, std::size_t> column_of;
    for (std::size_t c = 0; c < map.monomials.size(); ++c) {
        column_of.emplace(map.monomials[c], c);
    }

    std::size_t positions = 1;
    for (int p = 0; p < k; ++p) positions *= n;

    const auto m = static_cast<Eigen::Index>(map.monomials.size());
    map.w = Matrix::Zero(static_cast<Eigen::Index>(positions), m);
    map.position_monomial.resize(positions);
    map.multiplicity.assign(map.monomials.size(), 0.0);

    MultiIndex digits(static_cast<std::size_t>(k));
    for (std::size_t pos = 0; pos < positions; ++pos) {
        // first Kronecker factor is the most significant digit
        std::size_t rest = pos;
        for (int d = k - 1; d >= 0; --d) {
            digits[static_cast<std::size_t>(d)] = static_cast<int>(rest % n);
            rest /= n;
        }
        MultiIndex key = digits;
        std::sort(key.begin(), key.end());
        const std::size_t col = column_of.at(key);
        map.position_monomial[pos] = col;
        map.multiplicity[col] += 1.0;
        map.w(static_cast<Eigen::Index>(pos), static_cast<Eigen::Index>(col)) = 1.0;
    }

    // W^T W is diagonal, so the pseudo-inverse averages duplicate rows.
    map.w_plus = Matrix::Zero(m, static_cast<Eigen::Index>(positions));
    for (std::size_t pos = 0; pos < positions; ++pos) {
        const std::size_t col = map.position_monomial[pos];
        map.w_plus(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(pos)) = 1.0 / map.multiplicity[col];
    }
    return map;
}

Vector monomials(const Vector& x, const ReductionMap& map) {
    if (static_cast<std::size_t>(x.size()) != map.n) {
        throw std::invalid_argument("monomials: state dimension does not match reduction map");
    }
    Vector eta(static_cast<Eigen::Index>(map.monomials.size()));
    for (std::size_t c = 0; c < map.monomials.size(); ++c) {
        double v = 1.0;
        for (int a : map.monomials[c]) v *= x(a);
        eta(static_cast<Eigen::Index>(c)) = v;
    }
    return eta;
}

Matrix reduce_generator(const Matrix& lifted_generator, const ReductionMap& map) {
    if (lifted_generator.rows() != map.w.rows() || lifted_generator.cols() != map.w.rows()) {
        throw std::invalid_argument("reduce_generator: generator is " + std::to_string(lifted_generator.rows()) + "x" +
                                    std::to_string(lifted_generator.cols()) + ", reduction expects " +
                                    std::to_string(map.w.rows()) + "x" + std::to_string(map.w.rows()));
    }
    return map.w_plus * (lifted_generator * map.w);
}

Matrix reduced_generator_direct(const Matrix& a, const ReductionMap& map) {
    if (a.rows() != a.cols() || static_cast<std::size_t>(a.rows()) != map.n) {
        throw std::invalid_argument("reduced_generator_direct: matrix does not match reduction map");
    }
    std::map<MultiIndex, std::size_t> column_of;
    for (std::size_t c = 0; c < map.monomials.size(); ++c) {
        column_of.emplace(map.monomials[c], c);
    }
    const auto m = static_cast<Eigen::Index>(map.monomials.size());
    Matrix r = Matrix::Zero(m, m);
    for (std::size_t row = 0; row < map.monomials.size(); ++row) {
        const MultiIndex& mono = map.monomials[row];
        for (std::size_t l = 0; l < mono.size(); ++l) {
            for (int b = 0; b < static_cast<int>(map.n); ++b) {
                const double coeff = a(mono[l], b);
                if (coeff == 0.0) continue;
                MultiIndex target = mono;
                target[l] = b;
                std::sort(target.begin(), target.end());
                r(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(column_of.at(target))) += coeff;
            }
        }
    }
    return r;
}

Vector TildeReduction::reduce_state(const Vector& x) const {
    Vector eta(dimension());
    Eigen::Index offset = 0;
    for (const auto& map : maps) {
        const Vector block = monomials(x, map);
        eta.segment(offset, block.size()) = block;
        offset += block.size();
    }
    return eta;
}

TildeReduction reduce_tilde(const SwitchedLinearSystem& system, int level) {
    if (level < 1) {
        throw std::invalid_argument("reduce_tilde: level must be >= 1");
    }
    TildeReduction red;
    red.level = level;
    red.n = static_cast<std::size_t>(system.dimension());
    std::vector<Matrix> ws;
    std::vector<Matrix> wps;
    for (int k = 1; k <= level; ++k) {
        red.maps.push_back(build_reduction(red.n, k));
        ws.push_back(red.maps.back().w);
        wps.push_back(red.maps.back().w_plus);
    }
    red.w_tilde = lift::block_diagonal(ws);
    red.w_tilde_plus = lift::block_diagonal(wps);

    auto reduced_tilde = [&](const Matrix& a) {
        std::vector<Matrix> blocks;
        blocks.reserve(red.maps.size());
        for (const auto& map : red.maps) {
            blocks.push_back(reduced_generator_direct(a, map));
        }
        return lift::block_diagonal(blocks);
    };
    for (const auto& a : system.modes()) {
        red.generators.push_back(reduced_tilde(a));
    }
    if (system.uncertainty()) {
        red.uncertainty = reduced_tilde(system.uncertainty()->delta);
    }
    return red;
}

} // namespace kronlyap::reduction
