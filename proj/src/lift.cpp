#include "kronlyap/lift.hpp"

#include <stdexcept>
#include <string>

namespace kronlyap::lift {

namespace {

void require_level(int level) {
    if (level < 1) {
        throw std::invalid_argument("lift level must be >= 1, got " + std::to_string(level));
    }
}

// I_m (x) b
Matrix identity_kron(Eigen::Index m, const Matrix& b) {
    Matrix out = Matrix::Zero(m * b.rows(), m * b.cols());
    for (Eigen::Index i = 0; i < m; ++i) {
        out.block(i * b.rows(), i * b.cols(), b.rows(), b.cols()) = b;
    }
    return out;
}

// a (x) I_m
Matrix kron_identity(const Matrix& a, Eigen::Index m) {
    Matrix out = Matrix::Zero(a.rows() * m, a.cols() * m);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            if (a(r, c) != 0.0) {
                out.block(r * m, c * m, m, m).diagonal().setConstant(a(r, c));
            }
        }
    }
    return out;
}

} // namespace

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
        }
    }
    return out;
}

Matrix kron_power(const Matrix& a, int k) {
    require_level(k);
    Matrix out = a;
    for (int p = 2; p <= k; ++p) {
        out = kron(a, out);
    }
    return out;
}

Vector kron_power(const Vector& v, int k) {
    require_level(k);
    Vector out = v;
    for (int p = 2; p <= k; ++p) {
        Vector next(v.size() * out.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            next.segment(i * out.size(), out.size()) = v(i) * out;
        }
        out = std::move(next);
    }
    return out;
}

RowVector kron_power(const RowVector& v, int k) {
    Vector col = v.transpose();
    return kron_power(col, k).transpose();
}

std::size_t lifted_dimension(std::size_t n, int level) {
    require_level(level);
    std::size_t total = 0;
    std::size_t power = 1;
    for (int k = 1; k <= level; ++k) {
        power *= n;
        total += power;
    }
    return total;
}

Matrix block_diagonal(std::span<const Matrix> blocks) {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    Matrix out = Matrix::Zero(rows, cols);
    Eigen::Index r = 0;
    Eigen::Index c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

std::vector<Matrix> lift_generator_chain(const Matrix& a, int level) {
    require_level(level);
    if (a.rows() != a.cols()) {
        throw std::invalid_argument("lift_generator needs a square matrix");
    }
    const Eigen::Index n = a.rows();
    std::vector<Matrix> chain;
    chain.reserve(static_cast<std::size_t>(level));
    chain.push_back(a);
    Eigen::Index inner = n; // n^{k-1}
    for (int k = 2; k <= level; ++k) {
        const Matrix& prev = chain.back();
        chain.push_back(identity_kron(n, prev) + kron_identity(a, inner));
        inner *= n;
    }
    return chain;
}

Matrix lift_generator(const Matrix& a, int level) {
    return lift_generator_chain(a, level).back();
}

Matrix lift_tilde_generator(const Matrix& a, int level) {
    const auto chain = lift_generator_chain(a, level);
    return block_diagonal(chain);
}

LiftedState lift_state(const Vector& x, int level) {
    require_level(level);
    const auto n = static_cast<std::size_t>(x.size());
    LiftedState s;
    s.level = level;
    s.full_dim = lifted_dimension(n, level);
    s.vector.resize(static_cast<Eigen::Index>(s.full_dim));
    Vector power = x;
    Eigen::Index offset = 0;
    for (int k = 1; k <= level; ++k) {
        if (k > 1) {
            Vector next(x.size() * power.size());
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                next.segment(i * power.size(), power.size()) = x(i) * power;
            }
            power = std::move(next);
        }
        s.vector.segment(offset, power.size()) = power;
        offset += power.size();
    }
    return s;
}

LiftedIO lift_io(const Vector& b, const RowVector& c, int level) {
    if (b.size() != c.size()) {
        throw std::invalid_argument("lift_io: b and c must have the same length");
    }
    LiftedIO io;
    io.level = level;
    io.b = lift_state(b, level).vector;
    io.c = lift_state(c.transpose(), level).vector.transpose();
    return io;
}

LiftedUncertainty lift_uncertainty(const Matrix& delta, int level) {
    LiftedUncertainty u;
    u.blocks = lift_generator_chain(delta, level);
    u.tilde = block_diagonal(u.blocks);
    return u;
}

LiftedGenerators lift_system(const SwitchedLinearSystem& system, int level) {
    LiftedGenerators g;
    g.level = level;
    for (const auto& a : system.modes()) {
        auto chain = lift_generator_chain(a, level);
        g.tilde.push_back(block_diagonal(chain));
        g.blocks.push_back(std::move(chain));
    }
    if (system.uncertainty()) {
        g.uncertainty = lift_uncertainty(system.uncertainty()->delta, level);
    }
    return g;
}

} // namespace kronlyap::lift
