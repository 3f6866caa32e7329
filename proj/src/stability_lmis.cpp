#include "kronlyap/sdp.hpp"

#include <algorithm>
#include <stdexcept>

namespace kronlyap::sdp {

double default_margin(const std::vector<Matrix>& generators) {
    double norm = 0.0;
    for (const auto& g : generators) {
        Eigen::JacobiSVD<Matrix> svd(g);
        norm = std::max(norm, svd.singularValues()(0));
    }
    return 1e-6 * norm;
}

StabilityLmis build_stability_lmis(const std::vector<Matrix>& generators, double eps, double eps_p,
                                   const std::optional<Matrix>& lower_bound) {
    if (generators.empty()) throw std::invalid_argument("build_stability_lmis needs at least one generator");
    const auto m = generators.front().rows();
    for (const auto& g : generators) {
        if (g.rows() != m || g.cols() != m) {
            throw std::invalid_argument("build_stability_lmis: generators must be square with equal size");
        }
    }
    if (eps < 0.0 || eps_p < 0.0) throw std::invalid_argument("build_stability_lmis: margins must be >= 0");
    if (lower_bound && (lower_bound->rows() != m || lower_bound->cols() != m)) {
        throw std::invalid_argument("build_stability_lmis: lower bound is " + std::to_string(lower_bound->rows()) + "x" +
                                    std::to_string(lower_bound->cols()) + ", expected " + std::to_string(m) + "x" +
                                    std::to_string(m));
    }

    StabilityLmis out;
    auto& prob = out.problem;
    out.p = prob.add_symmetric("P", m);
    const Matrix eye = Matrix::Identity(m, m);
    for (std::size_t j = 0; j < generators.size(); ++j) {
        // P G + G' P + eps I <= 0
        const auto blk = prob.add_block("decay[" + std::to_string(j + 1) + "]", m, Sense::nsd, eps * eye);
        prob.add_term(blk, out.p, eye, generators[j]);
    }
    // P - lower >= 0
    const Matrix lower = lower_bound ? *lower_bound : Matrix(eps_p * eye);
    const auto pos = prob.add_block("positivity", m, Sense::psd, -lower);
    prob.add_embedded(pos, out.p, 0);
    return out;
}

} // namespace kronlyap::sdp
