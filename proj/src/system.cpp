#include "kronlyap/system.hpp"

#include <stdexcept>
#include <string>

namespace kronlyap {

namespace {

void require_finite(const Matrix& m, const std::string& what) {
    if (!m.allFinite()) {
        throw std::invalid_argument(what + " contains non-finite entries");
    }
}

} // namespace

SwitchedLinearSystem::SwitchedLinearSystem(std::vector<Matrix> modes,
                                           std::optional<Vector> input_b,
                                           std::optional<RowVector> output_c)
    : modes_(std::move(modes)), b_(std::move(input_b)), c_(std::move(output_c)) {
    if (modes_.empty()) {
        throw std::invalid_argument("a switched system needs at least one mode");
    }
    n_ = modes_.front().rows();
    if (n_ < 1) {
        throw std::invalid_argument("state dimension must be positive");
    }
    for (std::size_t j = 0; j < modes_.size(); ++j) {
        const auto& a = modes_[j];
        if (a.rows() != n_ || a.cols() != n_) {
            throw std::invalid_argument("mode " + std::to_string(j + 1) + " is " +
                                        std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                        ", expected " + std::to_string(n_) + "x" + std::to_string(n_));
        }
        require_finite(a, "mode " + std::to_string(j + 1));
    }
    if (b_ && b_->size() != n_) {
        throw std::invalid_argument("input_b has length " + std::to_string(b_->size()) + ", expected " +
                                    std::to_string(n_));
    }
    if (c_ && c_->size() != n_) {
        throw std::invalid_argument("output_c has length " + std::to_string(c_->size()) + ", expected " +
                                    std::to_string(n_));
    }
    if (b_) require_finite(*b_, "input_b");
    if (c_) require_finite(*c_, "output_c");
}

SwitchedLinearSystem SwitchedLinearSystem::from_uncertainty(Uncertainty uncertainty,
                                                            std::optional<Vector> input_b,
                                                            std::optional<RowVector> output_c) {
    const auto n = uncertainty.nominal.rows();
    if (uncertainty.nominal.cols() != n || uncertainty.delta.rows() != n || uncertainty.delta.cols() != n) {
        throw std::invalid_argument("uncertainty nominal and delta must be square with equal size");
    }
    if (!(uncertainty.lo <= uncertainty.hi)) {
        throw std::invalid_argument("uncertainty range must satisfy lo <= hi");
    }
    std::vector<Matrix> modes{uncertainty.nominal + uncertainty.hi * uncertainty.delta,
                              uncertainty.nominal + uncertainty.lo * uncertainty.delta};
    SwitchedLinearSystem sys(std::move(modes), std::move(input_b), std::move(output_c));
    sys.uncertainty_ = std::move(uncertainty);
    return sys;
}

Matrix SwitchedLinearSystem::uncertain_matrix(double lambda) const {
    if (!uncertainty_) {
        throw std::logic_error("system has no uncertainty description");
    }
    return uncertainty_->nominal + lambda * uncertainty_->delta;
}

} // namespace kronlyap
