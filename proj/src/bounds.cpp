#include "kronlyap/analysis.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kronlyap::analysis {

namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kRidge = 1e-10;

// p + p^2 + ... + p^level - value and its derivative, by Horner.
std::pair<double, double> root_poly(double p, int level, double value) {
    double f = 0.0;
    double df = 0.0;
    for (int k = level; k >= 1; --k) {
        df = df * p + f;
        f = f * p + 1.0;
    }
    // f now holds 1 + p + ... + p^{level-1}; shift by one power
    return {f * p - value, df * p + f};
}

} // namespace

double unique_positive_root(double value, int level) {
    if (!(value > 0.0) || !std::isfinite(value)) throw std::invalid_argument("root extraction needs a positive value");
    if (level < 1) throw std::invalid_argument("level must be >= 1");
    if (level == 1) return value;

    // the polynomial is increasing on [0, inf), negative at 0 and
    // nonnegative at max(1, value)
    double lo = 0.0;
    double hi = std::max(1.0, value);
    while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        (root_poly(mid, level, value).first > 0.0 ? hi : lo) = mid;
    }
    double p = 0.5 * (lo + hi);
    for (int it = 0; it < 50; ++it) {
        const auto [f, df] = root_poly(p, level, value);
        const double step = f / df;
        p -= step;
        if (std::abs(step) <= 1e-12 * std::max(1.0, p)) break;
    }
    return p;
}

PeakBoundResult peak_bound(const QuadraticCertificate& cert, const Vector& b, const RowVector& c, bool sign_robust) {
    const StateLift lift(cert.n, cert.level, cert.coordinates);
    if (cert.p.rows() != lift.dimension() || cert.p.cols() != lift.dimension()) {
        throw std::invalid_argument("certificate dimension does not match its level");
    }
    PeakBoundResult out;
    out.level = cert.level;

    const Matrix p = 0.5 * (cert.p + cert.p.transpose());
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(p, Eigen::EigenvaluesOnly).eigenvalues();
    Matrix reg = p;
    if (ev.minCoeff() <= 0.0 || ev.maxCoeff() > kConditionLimit * ev.minCoeff()) {
        reg.diagonal().array() += kRidge;
        std::ostringstream os;
        os << "certificate is ill-conditioned (eigenvalues in [" << ev.minCoeff() << ", " << ev.maxCoeff()
           << "]); inverse computed with ridge " << kRidge;
        out.warnings.push_back(os.str());
    }
    const Eigen::LLT<Matrix> llt(reg);
    if (llt.info() != Eigen::Success) {
        throw std::domain_error("certificate is not positive semidefinite; no peak bound");
    }

    const Vector bt = lift(b);
    const double input = std::sqrt(std::max(0.0, bt.dot(p * bt)));
    auto lifted_bound = [&](const RowVector& ct) {
        const Vector v = ct.transpose();
        return std::sqrt(std::max(0.0, v.dot(llt.solve(v)))) * input;
    };
    auto finish = [&](double lifted) {
        PeakBound pb;
        pb.lifted = lifted;
        pb.bound = lifted > 0.0 ? unique_positive_root(lifted, cert.level) : 0.0;
        return pb;
    };

    const double nominal = lifted_bound(lift.output_row(c));
    out.nominal = finish(nominal);
    if (sign_robust) {
        const double alternate = cert.level == 1 ? nominal : lifted_bound(lift.output_row(c, true));
        out.sign_robust = finish(std::max(nominal, alternate));
    }
    return out;
}

double worst_case_mode(const Matrix& p, const Matrix& lifted_delta, const Vector& xi, double lo, double hi) {
    if (p.rows() != xi.size() || lifted_delta.rows() != xi.size() || lifted_delta.cols() != xi.size()) {
        throw std::invalid_argument("worst_case_mode: dimension mismatch");
    }
    // xi' (P D + D' P) xi = 2 xi' P D xi
    const double slope = 2.0 * xi.dot(p * (lifted_delta * xi));
    return slope >= 0.0 ? hi : lo;
}

} // namespace kronlyap::analysis
