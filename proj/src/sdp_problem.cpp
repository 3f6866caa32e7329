#include "kronlyap/sdp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace kronlyap::sdp {

std::size_t Variable::coordinate_count() const {
    const auto r = static_cast<std::size_t>(rows);
    const auto c = static_cast<std::size_t>(cols);
    return shape == VariableShape::symmetric ? r * (r + 1) / 2 : r * c;
}

VariableId SdpProblem::add_symmetric(std::string name, Eigen::Index m) {
    if (m < 1) throw std::invalid_argument("symmetric variable '" + name + "' needs positive size");
    Variable v{std::move(name), VariableShape::symmetric, m, m, coordinates_};
    coordinates_ += v.coordinate_count();
    variables_.push_back(std::move(v));
    return VariableId{variables_.size() - 1};
}

VariableId SdpProblem::add_matrix(std::string name, Eigen::Index rows, Eigen::Index cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("matrix variable '" + name + "' needs positive size");
    Variable v{std::move(name), VariableShape::general, rows, cols, coordinates_};
    coordinates_ += v.coordinate_count();
    variables_.push_back(std::move(v));
    return VariableId{variables_.size() - 1};
}

BlockId SdpProblem::add_block(std::string name, Eigen::Index size, Sense sense, Matrix constant) {
    if (size < 1) throw std::invalid_argument("LMI block '" + name + "' needs positive size");
    if (constant.size() == 0) {
        constant = Matrix::Zero(size, size);
    }
    if (constant.rows() != size || constant.cols() != size) {
        throw std::invalid_argument("LMI block '" + name + "': constant has wrong shape");
    }
    const double scale = std::max(1.0, constant.cwiseAbs().maxCoeff());
    if ((constant - constant.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("LMI block '" + name + "': constant is not symmetric");
    }
    blocks_.push_back(LmiBlock{std::move(name), size, sense, 0.5 * (constant + constant.transpose()), {}});
    return BlockId{blocks_.size() - 1};
}

void SdpProblem::check_variable(std::size_t var) const {
    if (var >= variables_.size()) throw std::invalid_argument("unknown variable id");
}

void SdpProblem::add_term(BlockId block, VariableId var, Matrix left, Matrix right, double scale) {
    if (block.index >= blocks_.size()) throw std::invalid_argument("unknown block id");
    check_variable(var.index);
    auto& b = blocks_[block.index];
    const auto& v = variables_[var.index];
    if (left.rows() != b.size || left.cols() != v.rows || right.rows() != v.cols || right.cols() != b.size) {
        throw std::invalid_argument("term for variable '" + v.name + "' in block '" + b.name +
                                    "' has inconsistent dimensions");
    }
    b.terms.push_back(Term{var.index, scale * left, std::move(right)});
}

void SdpProblem::add_embedded(BlockId block, VariableId var, Eigen::Index at, double scale) {
    if (block.index >= blocks_.size()) throw std::invalid_argument("unknown block id");
    check_variable(var.index);
    const auto& v = variables_[var.index];
    const auto size = blocks_[block.index].size;
    if (v.shape == VariableShape::general && (v.rows != 1 || v.cols != 1)) {
        throw std::invalid_argument("add_embedded needs a symmetric or scalar variable");
    }
    if (at < 0 || at + v.rows > size) throw std::invalid_argument("add_embedded: placement out of range");
    Matrix j = Matrix::Zero(size, v.rows);
    for (Eigen::Index a = 0; a < v.rows; ++a) j(at + a, a) = 1.0;
    // J V J^T = 1/2 (J V J^T + (J V J^T)^T)
    add_term(block, var, 0.5 * j, j.transpose(), scale);
}

void SdpProblem::add_equality(std::string name, LinearForm form, double rhs) {
    for (const auto& [var, coeff] : form.parts) {
        check_variable(var);
        const auto& v = variables_[var];
        if (coeff.rows() != v.rows || coeff.cols() != v.cols) {
            throw std::invalid_argument("equality '" + name + "': coefficient shape does not match '" + v.name + "'");
        }
    }
    equalities_.push_back(Equality{std::move(name), std::move(form), rhs});
}

void SdpProblem::add_objective(VariableId var, Matrix coefficient) {
    check_variable(var.index);
    const auto& v = variables_[var.index];
    if (coefficient.rows() != v.rows || coefficient.cols() != v.cols) {
        throw std::invalid_argument("objective coefficient shape does not match '" + v.name + "'");
    }
    objective_.parts.emplace_back(var.index, std::move(coefficient));
}

Matrix SdpProblem::unpack(const Vector& y, std::size_t var) const {
    check_variable(var);
    const auto& v = variables_[var];
    Matrix out(v.rows, v.cols);
    auto k = static_cast<Eigen::Index>(v.offset);
    if (v.shape == VariableShape::symmetric) {
        for (Eigen::Index b = 0; b < v.cols; ++b) {
            for (Eigen::Index a = 0; a <= b; ++a) {
                out(a, b) = y(k);
                out(b, a) = y(k);
                ++k;
            }
        }
    } else {
        for (Eigen::Index b = 0; b < v.cols; ++b) {
            for (Eigen::Index a = 0; a < v.rows; ++a) out(a, b) = y(k++);
        }
    }
    return out;
}

Vector SdpProblem::pack(const std::vector<Matrix>& values) const {
    if (values.size() != variables_.size()) throw std::invalid_argument("pack: wrong number of values");
    Vector y(static_cast<Eigen::Index>(coordinates_));
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const auto& v = variables_[i];
        const auto& m = values[i];
        if (m.rows() != v.rows || m.cols() != v.cols) throw std::invalid_argument("pack: wrong shape for " + v.name);
        auto k = static_cast<Eigen::Index>(v.offset);
        if (v.shape == VariableShape::symmetric) {
            for (Eigen::Index b = 0; b < v.cols; ++b) {
                for (Eigen::Index a = 0; a <= b; ++a) y(k++) = 0.5 * (m(a, b) + m(b, a));
            }
        } else {
            for (Eigen::Index b = 0; b < v.cols; ++b) {
                for (Eigen::Index a = 0; a < v.rows; ++a) y(k++) = m(a, b);
            }
        }
    }
    return y;
}

Matrix SdpProblem::evaluate_block(std::size_t block, const std::vector<Matrix>& values) const {
    const auto& b = blocks_.at(block);
    Matrix f = b.constant;
    for (const auto& t : b.terms) {
        const Matrix lvr = t.left * values.at(t.variable) * t.right;
        f += lvr + lvr.transpose();
    }
    return f;
}

Vector SdpProblem::coordinates_of(const LinearForm& form) const {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(coordinates_));
    for (const auto& [var, c] : form.parts) {
        const auto& v = variables_.at(var);
        auto k = static_cast<Eigen::Index>(v.offset);
        if (v.shape == VariableShape::symmetric) {
            for (Eigen::Index b = 0; b < v.cols; ++b) {
                for (Eigen::Index a = 0; a <= b; ++a) {
                    g(k++) += (a == b) ? c(a, a) : c(a, b) + c(b, a);
                }
            }
        } else {
            for (Eigen::Index b = 0; b < v.cols; ++b) {
                for (Eigen::Index a = 0; a < v.rows; ++a) g(k++) += c(a, b);
            }
        }
    }
    return g;
}

std::string to_string(Status status) {
    switch (status) {
    case Status::optimal: return "optimal";
    case Status::feasible: return "feasible";
    case Status::infeasible: return "infeasible";
    case Status::inaccurate: return "inaccurate";
    case Status::failed: return "failed";
    }
    return "unknown";
}

Status status_from_string(const std::string& s) {
    for (Status st : {Status::optimal, Status::feasible, Status::infeasible, Status::inaccurate, Status::failed}) {
        if (to_string(st) == s) return st;
    }
    throw std::invalid_argument("unknown solver status '" + s + "'");
}

SolverSettings SolverSettings::from_environment() {
    SolverSettings s;
    if (const char* env = std::getenv("KRONLYAP_SOLVER_TOL")) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end != env && std::isfinite(v) && v > 0.0) s.set_tolerance(v);
    }
    return s;
}

void SolverSettings::set_tolerance(double tol) {
    if (!(tol > 0.0) || !std::isfinite(tol)) throw std::invalid_argument("solver tolerance must be positive");
    feas_tol = tol;
    gap_tol = tol;
    acceptable_tol = std::max(acceptable_tol, 10.0 * tol);
}

Verification verify(const SdpProblem& problem, const std::vector<Matrix>& values) {
    Verification out;
    for (std::size_t l = 0; l < problem.blocks().size(); ++l) {
        const auto& b = problem.blocks()[l];
        Matrix f = problem.evaluate_block(l, values);
        if (b.sense == Sense::nsd) f = -f;
        f = 0.5 * (f + f.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> eig(f, Eigen::EigenvaluesOnly);
        const double lmin = eig.eigenvalues().minCoeff();
        out.blocks.push_back(BlockResidual{b.name, lmin});
        out.max_violation = std::max(out.max_violation, -lmin);
    }
    for (const auto& e : problem.equalities()) {
        double lhs = 0.0;
        for (const auto& [var, c] : e.form.parts) {
            lhs += (c.array() * values.at(var).array()).sum();
        }
        out.max_equality_residual =
            std::max(out.max_equality_residual, std::abs(lhs - e.rhs) / std::max(1.0, std::abs(e.rhs)));
    }
    return out;
}

} // namespace kronlyap::sdp
