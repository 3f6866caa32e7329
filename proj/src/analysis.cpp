#include "kronlyap/analysis.hpp"

#include "kronlyap/lift.hpp"
#include "solve_report.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <stdexcept>

namespace kronlyap::analysis {

std::string to_string(Coordinates c) { return c == Coordinates::full ? "full" : "reduced"; }

Coordinates coordinates_from_string(const std::string& s) {
    if (s == "full") return Coordinates::full;
    if (s == "reduced") return Coordinates::reduced;
    throw std::invalid_argument("unknown coordinates '" + s + "' (expected full or reduced)");
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::certified: return "certified";
    case Verdict::infeasible: return "infeasible";
    case Verdict::failed: return "failed";
    }
    return "unknown";
}

std::string to_string(ReachNormalization n) { return n == ReachNormalization::identity ? "identity" : "trace"; }

ReachNormalization reach_normalization_from_string(const std::string& s) {
    if (s == "identity") return ReachNormalization::identity;
    if (s == "trace") return ReachNormalization::trace;
    throw std::invalid_argument("unknown normalization '" + s + "' (expected identity or trace)");
}

// ---- lifts -----------------------------------------------------------------

StateLift::StateLift(std::size_t n, int level, Coordinates coordinates)
    : n_(n), level_(level), coordinates_(coordinates) {
    if (n == 0) throw std::invalid_argument("StateLift: n must be positive");
    if (level < 1) throw std::invalid_argument("StateLift: level must be >= 1");
    if (coordinates == Coordinates::full) {
        dimension_ = static_cast<Eigen::Index>(lift::lifted_dimension(n, level));
    } else {
        for (int k = 1; k <= level; ++k) {
            maps_.push_back(reduction::build_reduction(n, k));
            dimension_ += static_cast<Eigen::Index>(maps_.back().size());
        }
    }
}

Vector StateLift::operator()(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != n_) throw std::invalid_argument("StateLift: state has wrong dimension");
    if (coordinates_ == Coordinates::full) return lift::lift_state(x, level_).vector;
    Vector out(dimension_);
    Eigen::Index at = 0;
    for (const auto& m : maps_) {
        const Vector part = reduction::monomials(x, m);
        out.segment(at, part.size()) = part;
        at += part.size();
    }
    return out;
}

RowVector StateLift::output_row(const RowVector& c, bool alternate) const {
    if (static_cast<std::size_t>(c.size()) != n_) throw std::invalid_argument("output row has wrong dimension");
    RowVector out(dimension_);
    Eigen::Index at = 0;
    for (int k = 1; k <= level_; ++k) {
        const double sign = (alternate && k % 2 == 1) ? -1.0 : 1.0;
        if (coordinates_ == Coordinates::full) {
            const RowVector part = lift::kron_power(c, k);
            out.segment(at, part.size()) = sign * part;
            at += part.size();
        } else {
            // (x)^k c . W_k: a monomial column collects all of its
            // Kronecker positions, each contributing the same product
            const auto& m = maps_[static_cast<std::size_t>(k - 1)];
            const Vector mono = reduction::monomials(c.transpose(), m);
            for (std::size_t j = 0; j < m.size(); ++j) {
                out(at++) = sign * m.multiplicity[j] * mono(static_cast<Eigen::Index>(j));
            }
        }
    }
    return out;
}

Vector LiftedModel::lift_input(const Vector& b) const { return lift()(b); }

RowVector LiftedModel::lift_output(const RowVector& c) const { return lift().output_row(c); }

LiftedModel build_model(const SwitchedLinearSystem& system, int level, Coordinates coordinates) {
    if (level < 1) throw std::invalid_argument("level must be >= 1");
    LiftedModel m;
    m.level = level;
    m.n = static_cast<std::size_t>(system.dimension());
    m.coordinates = coordinates;
    if (coordinates == Coordinates::full) {
        auto lifted = lift::lift_system(system, level);
        const auto d = lifted.dimension();
        m.generators = std::move(lifted.tilde);
        if (lifted.uncertainty) m.uncertainty = std::move(lifted.uncertainty->tilde);
        m.gram = Matrix::Identity(d, d);
        m.to_full = Matrix::Identity(d, d);
    } else {
        auto red = reduction::reduce_tilde(system, level);
        m.generators = std::move(red.generators);
        m.uncertainty = std::move(red.uncertainty);
        m.gram = red.w_tilde.transpose() * red.w_tilde;
        m.to_full = std::move(red.w_tilde);
    }
    return m;
}

// ---- helpers ---------------------------------------------------------------

namespace {

using detail::make_report;
using detail::verdict_of;

struct Solved {
    sdp::SdpSolution solution;
    SolveReport report;
    Verdict verdict;
};

Solved run(const sdp::SdpProblem& problem, const AnalysisOptions& options) {
    const sdp::InteriorPointBackend backend;
    Solved s{sdp::solve(problem, options.solver, backend), {}, Verdict::failed};
    s.report = make_report(s.solution, backend.name());
    s.verdict = verdict_of(s.solution.status);
    return s;
}

double margin_for(const LiftedModel& model, const AnalysisOptions& options) {
    if (options.margin) {
        if (*options.margin < 0.0) throw std::invalid_argument("margin must be >= 0");
        return *options.margin;
    }
    return sdp::default_margin(model.generators);
}

double max_eigenvalue(const Matrix& s) {
    const Matrix sym = 0.5 * (s + s.transpose());
    return Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

} // namespace

// ---- certificates ----------------------------------------------------------

bool CertificateCheck::passes(double tol) const {
    if (min_eigenvalue < -tol) return false;
    return std::all_of(decay.begin(), decay.end(), [tol](double v) { return v <= tol; });
}

CertificateCheck check_certificate(const LiftedModel& model, const Matrix& p, double margin) {
    if (p.rows() != model.dimension() || p.cols() != model.dimension()) {
        throw std::invalid_argument("certificate dimension does not match the model");
    }
    CertificateCheck out;
    for (const auto& g : model.generators) {
        const double raw = max_eigenvalue(p * g + g.transpose() * p);
        out.decay.push_back(raw);
        out.decay_margined.push_back(raw + margin);
    }
    out.min_eigenvalue = -max_eigenvalue(-p);
    return out;
}

Outcome<QuadraticCertificate> check_stability(const SwitchedLinearSystem& system, int level,
                                              const AnalysisOptions& options) {
    const LiftedModel model = build_model(system, level, options.coordinates);
    const double eps = margin_for(model, options);
    const auto lmis = sdp::build_stability_lmis(model.generators, eps, options.positivity);
    const Solved s = run(lmis.problem, options);

    Outcome<QuadraticCertificate> out;
    out.verdict = s.verdict;
    out.solver = s.report;
    if (s.verdict == Verdict::certified) {
        out.value = QuadraticCertificate{level, model.n, model.coordinates, s.solution.value(lmis.p), eps, "stability",
                                         s.report};
    }
    return out;
}

QuadraticCertificate product_certificate(const Matrix& p1, int level, Coordinates coordinates) {
    if (p1.rows() != p1.cols() || p1.rows() == 0) throw std::invalid_argument("P_1 must be square");
    if (level < 1) throw std::invalid_argument("level must be >= 1");
    const auto n = static_cast<std::size_t>(p1.rows());
    std::vector<Matrix> blocks;
    for (int k = 1; k <= level; ++k) {
        const Matrix pk = lift::kron_power(p1, k);
        if (coordinates == Coordinates::full) {
            blocks.push_back(pk);
        } else {
            const auto map = reduction::build_reduction(n, k);
            blocks.push_back(map.w.transpose() * pk * map.w);
        }
    }
    QuadraticCertificate cert;
    cert.level = level;
    cert.n = n;
    cert.coordinates = coordinates;
    cert.p = lift::block_diagonal(blocks);
    cert.provenance = "product";
    return cert;
}

Outcome<ReachResult> reach_certificate(const SwitchedLinearSystem& system, const Vector& x0, int level,
                                       ReachNormalization normalization, const AnalysisOptions& options) {
    if (x0.size() != system.dimension()) throw std::invalid_argument("x0 has wrong dimension");
    if (x0.isZero(0.0)) throw std::invalid_argument("reach set from x0 = 0 is degenerate (objective identically 0)");
    const LiftedModel model = build_model(system, level, options.coordinates);
    const double eps = margin_for(model, options);
    const Vector xi0 = model.lift_input(x0);
    const auto d = model.dimension();

    auto lmis = normalization == ReachNormalization::identity
                    ? sdp::build_stability_lmis(model.generators, eps, 1.0, model.gram)
                    : sdp::build_stability_lmis(model.generators, eps, 0.0, Matrix(Matrix::Zero(d, d)));
    if (normalization == ReachNormalization::trace) {
        lmis.problem.add_equality("trace", sdp::LinearForm{{{lmis.p.index, Matrix::Identity(d, d)}}},
                                  static_cast<double>(d));
    }
    lmis.problem.add_objective(lmis.p, xi0 * xi0.transpose());
    const Solved s = run(lmis.problem, options);

    Outcome<ReachResult> out;
    out.verdict = s.verdict;
    out.solver = s.report;
    if (s.verdict == Verdict::certified) {
        ReachResult r;
        r.certificate = QuadraticCertificate{level, model.n, model.coordinates, s.solution.value(lmis.p), eps, "reach",
                                             s.report};
        r.normalization = normalization;
        r.x0 = x0;
        r.level_value = xi0.dot(r.certificate.p * xi0);
        out.value = std::move(r);
    }
    return out;
}

Outcome<QuadraticCertificate> impulse_certificate(const SwitchedLinearSystem& system, int level,
                                                  const AnalysisOptions& options) {
    if (!system.has_io()) throw std::invalid_argument("impulse analysis needs input b and output c");
    const LiftedModel model = build_model(system, level, options.coordinates);
    const double eps = margin_for(model, options);
    const Vector bt = model.lift_input(*system.input_b());
    const RowVector ct = model.lift_output(*system.output_c());
    const auto m = model.dimension();
    const Matrix eye = Matrix::Identity(m, m);

    sdp::SdpProblem prob;
    const auto q = prob.add_symmetric("Q", m);
    const auto t = prob.add_scalar("t");
    for (std::size_t j = 0; j < model.generators.size(); ++j) {
        const auto blk = prob.add_block("decay[" + std::to_string(j + 1) + "]", m, sdp::Sense::nsd, eps * eye);
        prob.add_term(blk, q, eye, model.generators[j]);
    }
    // 1 - b~' Q b~ >= 0
    const auto input = prob.add_block("input", 1, sdp::Sense::psd, Matrix::Ones(1, 1));
    prob.add_term(input, q, -0.5 * bt.transpose(), bt);
    // [[t, c~], [c~', Q]] >= 0
    Matrix c0 = Matrix::Zero(m + 1, m + 1);
    c0.block(0, 1, 1, m) = ct;
    c0.block(1, 0, m, 1) = ct.transpose();
    const auto epi = prob.add_block("epigraph", m + 1, sdp::Sense::psd, c0);
    prob.add_embedded(epi, t, 0);
    prob.add_embedded(epi, q, 1);
    prob.add_objective(t, Matrix::Ones(1, 1));

    const Solved s = run(prob, options);
    Outcome<QuadraticCertificate> out;
    out.verdict = s.verdict;
    out.solver = s.report;
    if (s.verdict == Verdict::certified) {
        out.value = QuadraticCertificate{level, model.n, model.coordinates, s.solution.value(q), eps, "impulse",
                                         s.report};
    }
    return out;
}

// ---- evaluation ------------------------------------------------------------

LevelFunction::LevelFunction(const QuadraticCertificate& cert)
    : lift_(cert.n, cert.level, cert.coordinates), p_(cert.p) {
    if (p_.rows() != lift_.dimension()) throw std::invalid_argument("certificate dimension does not match its level");
    q_ = Vector::Zero(p_.rows());
}

LevelFunction::LevelFunction(const AugmentedCertificate& cert)
    : lift_(cert.n, cert.level, cert.coordinates), p_(cert.p), q_(cert.q), r_(cert.r) {
    if (p_.rows() != lift_.dimension() || q_.size() != lift_.dimension()) {
        throw std::invalid_argument("certificate dimension does not match its level");
    }
}

double LevelFunction::at_lifted(const Vector& xi) const { return xi.dot(p_ * xi) + 2.0 * q_.dot(xi) + r_; }

double LevelFunction::operator()(const Vector& x) const { return at_lifted(lift_(x)); }

double level_value(const QuadraticCertificate& cert, const Vector& x) { return LevelFunction(cert)(x); }

double AugmentedCertificate::value(const Vector& x) const { return LevelFunction(*this)(x); }

} // namespace kronlyap::analysis
