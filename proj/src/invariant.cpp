#include "kronlyap/analysis.hpp"

#include "solve_report.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kronlyap::analysis {

Matrix augmented_matrix(const Matrix& p, const Vector& q, double r, const Matrix& generator, double lambda) {
    const auto m = p.rows();
    if (p.cols() != m || q.size() != m || generator.rows() != m || generator.cols() != m) {
        throw std::invalid_argument("augmented_matrix: dimension mismatch");
    }
    Matrix out(m + 1, m + 1);
    out.topLeftCorner(m, m) = p * generator + generator.transpose() * p + lambda * p;
    const Vector side = generator.transpose() * q + lambda * q;
    out.topRightCorner(m, 1) = side;
    out.bottomLeftCorner(1, m) = side.transpose();
    out(m, m) = lambda * r;
    return out;
}

Outcome<AugmentedCertificate> invariant_certificate(const SwitchedLinearSystem& system, int level,
                                                    const Vector& anchor, const InvariantOptions& invariant,
                                                    const AnalysisOptions& options) {
    if (anchor.size() != system.dimension()) throw std::invalid_argument("anchor has wrong dimension");
    if (!std::isfinite(invariant.lambda) || !std::isfinite(invariant.r) || invariant.r == 0.0) {
        throw std::invalid_argument("invariant set needs a finite lambda and a nonzero r");
    }
    const LiftedModel model = build_model(system, level, options.coordinates);
    const double eps = options.margin ? *options.margin : sdp::default_margin(model.generators);
    if (eps < 0.0) throw std::invalid_argument("margin must be >= 0");
    const double lambda = invariant.lambda;
    const double r = invariant.r;
    const Vector xi0 = model.lift_input(anchor);
    const auto m = model.dimension();
    const bool pinned = lambda == 0.0; // q is forced to zero, see header

    sdp::SdpProblem prob;
    const auto pv = prob.add_symmetric("P", m);
    std::optional<sdp::VariableId> qv;
    if (!pinned) qv = prob.add_matrix("q", m, 1);

    const auto size = pinned ? m : m + 1;
    Matrix e = Matrix::Zero(size, m); // embeds the P block
    e.topRows(m).setIdentity();
    for (std::size_t j = 0; j < model.generators.size(); ++j) {
        const Matrix& g = model.generators[j];
        Matrix c0 = eps * Matrix::Identity(size, size);
        if (!pinned) c0(m, m) += lambda * r;
        const auto blk = prob.add_block("invariance[" + std::to_string(j + 1) + "]", size, sdp::Sense::nsd, c0);
        prob.add_term(blk, pv, e, g * e.transpose());
        if (lambda != 0.0) prob.add_term(blk, pv, 0.5 * lambda * e, e.transpose());
        if (!pinned) {
            Matrix corner = Matrix::Zero(1, size);
            corner(0, m) = 1.0;
            const Matrix right = g.transpose() + lambda * Matrix::Identity(m, m);
            prob.add_term(blk, *qv, e * right, corner);
        }
    }
    // V(x0) = 0: xi0' P xi0 + 2 q' xi0 + r = 0
    sdp::LinearForm anchor_form;
    anchor_form.parts.emplace_back(pv.index, xi0 * xi0.transpose());
    if (!pinned) anchor_form.parts.emplace_back(qv->index, 2.0 * xi0);
    prob.add_equality("anchor", anchor_form, -r);

    const sdp::InteriorPointBackend backend;
    const sdp::SdpSolution sol = sdp::solve(prob, options.solver, backend);

    Outcome<AugmentedCertificate> out;
    out.solver = detail::make_report(sol, backend.name());
    out.verdict = detail::verdict_of(sol.status);
    if (out.verdict == Verdict::certified) {
        AugmentedCertificate cert;
        cert.level = level;
        cert.n = model.n;
        cert.coordinates = model.coordinates;
        cert.p = sol.value(pv);
        cert.q = pinned ? Vector(Vector::Zero(m)) : Vector(sol.value(*qv).col(0));
        cert.r = r;
        cert.lambda = lambda;
        cert.margin = eps;
        std::ostringstream os;
        os << "r=" << r << ", anchored" << (pinned ? ", q=0" : "");
        cert.normalization = os.str();
        cert.anchor = anchor;
        cert.solver = out.solver;
        out.value = std::move(cert);
    }
    return out;
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    for (int k = -10; k <= 10; ++k) grid.push_back(0.05 * k);
    return grid;
}

std::vector<LambdaSweepEntry> sweep_lambda(const SwitchedLinearSystem& system, int level, const Vector& anchor,
                                           const std::vector<double>& grid, const AnalysisOptions& options) {
    std::vector<LambdaSweepEntry> out;
    for (double lambda : grid) {
        InvariantOptions inv;
        inv.lambda = lambda;
        out.push_back({lambda, invariant_certificate(system, level, anchor, inv, options).verdict});
    }
    return out;
}

} // namespace kronlyap::analysis
