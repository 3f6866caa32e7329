#include "kronlyap/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <tuple>

// Infeasible-start primal-dual path following on
//
//   (D)  min g'y   s.t.  Z = C + F(y) >= 0,  E y = f
//   (P)  max -<C,X> + f'w  s.t.  F*(X) + E'w = g,  X >= 0
//
// with the HKM search direction. The Schur complement
// M_kl = <F_k, X F_l Z^{-1}> is assembled term by term: every coordinate of
// a term L V R + (L V R)' is a sum of rank-2 matrices u v' + v u', so each
// row of M is a small product U V' folded back into coordinates.

namespace kronlyap::sdp {

namespace {

using Orientation = std::array<Eigen::Index, 2>;

struct PreparedTerm {
    std::size_t var = 0;
    Matrix left;
    Matrix right;
};

struct PreparedBlock {
    std::string name;
    Eigen::Index size = 0;
    Matrix c;
    std::vector<PreparedTerm> terms;
};

Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }

double inner(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

// K (rows x cols of the variable) -> coordinate vector
void fold(const Variable& v, const Matrix& k, Eigen::Ref<Vector> out) {
    Eigen::Index idx = 0;
    if (v.shape == VariableShape::symmetric) {
        for (Eigen::Index b = 0; b < v.cols; ++b) {
            for (Eigen::Index a = 0; a < b; ++a) out(idx++) += k(a, b) + k(b, a);
            out(idx++) += k(b, b);
        }
    } else {
        for (Eigen::Index b = 0; b < v.cols; ++b) {
            for (Eigen::Index a = 0; a < v.rows; ++a) out(idx++) += k(a, b);
        }
    }
}

std::vector<std::vector<Orientation>> orientations(const Variable& v) {
    std::vector<std::vector<Orientation>> out;
    out.reserve(v.coordinate_count());
    if (v.shape == VariableShape::symmetric) {
        for (Eigen::Index b = 0; b < v.cols; ++b) {
            for (Eigen::Index a = 0; a <= b; ++a) {
                if (a == b) {
                    out.push_back({Orientation{a, a}});
                } else {
                    out.push_back({Orientation{a, b}, Orientation{b, a}});
                }
            }
        }
    } else {
        for (Eigen::Index b = 0; b < v.cols; ++b) {
            for (Eigen::Index a = 0; a < v.rows; ++a) out.push_back({Orientation{a, b}});
        }
    }
    return out;
}

class Structure {
public:
    explicit Structure(const SdpProblem& p) : problem_(p) {
        for (const auto& b : p.blocks()) {
            const double sign = b.sense == Sense::psd ? 1.0 : -1.0;
            PreparedBlock pb{b.name, b.size, sign * b.constant, {}};
            for (const auto& t : b.terms) pb.terms.push_back(PreparedTerm{t.variable, sign * t.left, t.right});
            blocks_.push_back(std::move(pb));
        }
        for (const auto& v : p.variables()) orient_.push_back(orientations(v));
    }

    [[nodiscard]] const std::vector<PreparedBlock>& blocks() const { return blocks_; }

    [[nodiscard]] std::vector<Matrix> values(const Vector& y) const {
        std::vector<Matrix> out;
        for (std::size_t v = 0; v < problem_.variables().size(); ++v) out.push_back(problem_.unpack(y, v));
        return out;
    }

    // F(y) without the constant
    [[nodiscard]] std::vector<Matrix> forward(const Vector& y) const {
        const auto vals = values(y);
        std::vector<Matrix> out;
        for (const auto& b : blocks_) {
            Matrix f = Matrix::Zero(b.size, b.size);
            for (const auto& t : b.terms) {
                const Matrix lvr = t.left * vals[t.var] * t.right;
                f += lvr + lvr.transpose();
            }
            out.push_back(std::move(f));
        }
        return out;
    }

    // F*(Y) for symmetric Y
    [[nodiscard]] Vector adjoint(const std::vector<Matrix>& ys) const {
        Vector g = Vector::Zero(static_cast<Eigen::Index>(problem_.coordinate_count()));
        for (std::size_t l = 0; l < blocks_.size(); ++l) add_adjoint(l, ys[l], g);
        return g;
    }

    [[nodiscard]] Vector adjoint_block(std::size_t l, const Matrix& yl) const {
        Vector g = Vector::Zero(static_cast<Eigen::Index>(problem_.coordinate_count()));
        add_adjoint(l, yl, g);
        return g;
    }

    // Only the lower triangle of the result is filled (block rows of a later
    // variable against columns of an earlier one, plus full diagonal blocks).
    [[nodiscard]] Matrix schur(const std::vector<Matrix>& x, const std::vector<Matrix>& zi) const {
        const auto ny = static_cast<Eigen::Index>(problem_.coordinate_count());
        Matrix m = Matrix::Zero(ny, ny);
        for (std::size_t l = 0; l < blocks_.size(); ++l) {
            const auto& terms = blocks_[l].terms;
            for (std::size_t t1 = 0; t1 < terms.size(); ++t1) {
                for (std::size_t t2 = 0; t2 < terms.size(); ++t2) {
                    // (t2, t1) covers the transposed contribution
                    if (terms[t1].var > terms[t2].var) continue;
                    accumulate_pair(terms[t1], terms[t2], x[l], zi[l], m);
                }
            }
        }
        return m;
    }

private:
    void add_adjoint(std::size_t l, const Matrix& yl, Vector& g) const {
        for (const auto& t : blocks_[l].terms) {
            const auto& v = problem_.variables()[t.var];
            const Matrix k = 2.0 * (t.left.transpose() * yl * t.right.transpose());
            fold(v, k, g.segment(static_cast<Eigen::Index>(v.offset), static_cast<Eigen::Index>(v.coordinate_count())));
        }
    }

    // Writes K^T into column (offset(v1) + k1), rows of v2, where
    // K[(a,b),(c,d)] = <F1_ab, X F2_cd Z^{-1}>.
    void accumulate_pair(const PreparedTerm& s1, const PreparedTerm& s2, const Matrix& x, const Matrix& zi,
                         Matrix& m) const {
        const auto& v1 = problem_.variables()[s1.var];
        const auto& v2 = problem_.variables()[s2.var];
        const Matrix& l1 = s1.left;
        const Matrix& r1 = s1.right;
        const Matrix& l2 = s2.left;
        const Matrix& r2 = s2.right;

        const Matrix xl2 = x * l2;
        const Matrix xr2t = x * r2.transpose();
        const Matrix zil1 = zi * l1;
        const Matrix zir1t = zi * r1.transpose();

        const Matrix at = (r1 * xl2).transpose();              // p2 x q1
        const Matrix b = r2 * zil1;                             // q2 x p1
        const Matrix ct = (r1 * xr2t).transpose();             // q2 x q1
        const Matrix d = l2.transpose() * zil1;                 // p2 x p1
        const Matrix et = (l1.transpose() * xl2).transpose();  // p2 x p1
        const Matrix f = r2 * zir1t;                            // q2 x q1
        const Matrix gt = (l1.transpose() * xr2t).transpose(); // q2 x p1
        const Matrix h = l2.transpose() * zir1t;                // p2 x q1

        const auto off1 = static_cast<Eigen::Index>(v1.offset);
        const auto off2 = static_cast<Eigen::Index>(v2.offset);
        const auto n2 = static_cast<Eigen::Index>(v2.coordinate_count());
        const auto& orient = orient_[s1.var];

        Matrix u(v2.rows, 8);
        Matrix w(v2.cols, 8);
        Matrix k(v2.rows, v2.cols);
        for (std::size_t k1 = 0; k1 < orient.size(); ++k1) {
            const auto& list = orient[k1];
            const auto cols = static_cast<Eigen::Index>(4 * list.size());
            Eigen::Index c = 0;
            for (const auto& [a, bb] : list) {
                u.col(c) = at.col(bb);
                w.col(c++) = b.col(a);
                u.col(c) = d.col(a);
                w.col(c++) = ct.col(bb);
                u.col(c) = et.col(a);
                w.col(c++) = f.col(bb);
                u.col(c) = h.col(bb);
                w.col(c++) = gt.col(a);
            }
            k.noalias() = u.leftCols(cols) * w.leftCols(cols).transpose();
            const auto col = off1 + static_cast<Eigen::Index>(k1);
            fold(v2, k, m.col(col).segment(off2, n2));
        }
    }

    const SdpProblem& problem_;
    std::vector<PreparedBlock> blocks_;
    std::vector<std::vector<std::vector<Orientation>>> orient_;
};

// Largest alpha with X + alpha dX >= 0 (infinity when dX >= 0).
double max_step(const Matrix& x, const Matrix& dx) {
    Eigen::LLT<Matrix> llt(x);
    if (llt.info() != Eigen::Success) return 0.0;
    const Matrix t = llt.matrixL().solve(dx);
    const Matrix s = llt.matrixL().solve(t.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym(s), Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double min_eigenvalue(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym(a), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

double frob(const std::vector<Matrix>& ms) {
    double s = 0.0;
    for (const auto& m : ms) s += m.squaredNorm();
    return std::sqrt(s);
}

// Cholesky of the Schur complement (lower triangle) after symmetric Jacobi
// scaling; a small diagonal shift is added when the scaled matrix is not
// numerically positive definite.
class SchurSolver {
public:
    explicit SchurSolver(Matrix m) : m_(std::move(m)) {
        d_ = m_.diagonal().cwiseAbs().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
        m_ = d_.asDiagonal() * m_ * d_.asDiagonal(); // upper part is ignored
        llt_.compute(m_);
        while (llt_.info() != Eigen::Success) {
            reg_ = reg_ == 0.0 ? 1e-14 : reg_ * 10.0;
            if (reg_ > 1e-3) return;
            Matrix shifted = m_;
            shifted.diagonal().array() += reg_;
            llt_.compute(shifted);
        }
        ok_ = true;
    }

    [[nodiscard]] bool ok() const noexcept { return ok_; }
    [[nodiscard]] double regularization() const noexcept { return reg_; }

    // With a shift in place this solves the shifted system: near the
    // optimum M is singular to working precision and the shift damps the
    // direction in the (irrelevant) near-null space.
    [[nodiscard]] Matrix solve(const Matrix& rhs) const { return d_.asDiagonal() * llt_.solve(d_.asDiagonal() * rhs); }

private:
    Matrix m_;
    Vector d_;
    Eigen::LLT<Matrix, Eigen::Lower> llt_;
    double reg_ = 0.0;
    bool ok_ = false;
};

struct Direction {
    Vector dy;
    Vector dw;
    std::vector<Matrix> dx;
    std::vector<Matrix> dz;
};

} // namespace

SdpSolution InteriorPointBackend::solve(const SdpProblem& problem, const SolverSettings& settings) const {
    SdpSolution sol;
    const Structure st(problem);
    const auto& blocks = st.blocks();
    const auto ny = static_cast<Eigen::Index>(problem.coordinate_count());
    const auto ne = static_cast<Eigen::Index>(problem.equalities().size());

    if (blocks.empty()) {
        sol.diagnostics.message = "problem has no LMI blocks";
        return sol;
    }
    if (!(settings.start_scale > 0.0) || !(settings.step_fraction > 0.0 && settings.step_fraction < 1.0)) {
        sol.diagnostics.message = "invalid solver settings (start_scale > 0, 0 < step_fraction < 1)";
        return sol;
    }

    const Vector g = problem.coordinates_of(problem.objective());
    const bool feasibility_only = g.isZero(0.0);
    Matrix e(ne, ny);
    Vector f(ne);
    for (Eigen::Index i = 0; i < ne; ++i) {
        const auto& eq = problem.equalities()[static_cast<std::size_t>(i)];
        e.row(i) = problem.coordinates_of(eq.form).transpose();
        f(i) = eq.rhs;
    }

    double total_size = 0.0;
    double c_norm = 0.0;
    std::vector<Matrix> x;
    std::vector<Matrix> z;
    for (const auto& b : blocks) {
        total_size += static_cast<double>(b.size);
        c_norm += b.c.squaredNorm();
        double term_scale = 0.0;
        for (const auto& t : b.terms) term_scale = std::max(term_scale, t.left.norm() * t.right.norm());
        const double root = std::sqrt(static_cast<double>(b.size));
        const double zeta = std::max({10.0, root, b.c.norm(), term_scale});
        const double xi = std::max({10.0, root, 1.0 + g.cwiseAbs().maxCoeff()});
        x.push_back(settings.start_scale * xi * Matrix::Identity(b.size, b.size));
        z.push_back(settings.start_scale * zeta * Matrix::Identity(b.size, b.size));
    }
    c_norm = std::sqrt(c_norm);
    const double g_norm = g.norm();
    const double f_norm = f.norm();

    Vector y = Vector::Zero(ny);
    Vector w = Vector::Zero(ne);
    auto& diag = sol.diagnostics;

    int shifted_iterations = 0;
    double max_shift = 0.0;
    auto finish = [&](Status status, std::string message) {
        if (shifted_iterations > 0) {
            std::ostringstream os;
            os << "Schur complement shifted in " << shifted_iterations
               << (shifted_iterations == 1 ? " iteration" : " iterations") << " (largest shift " << max_shift << ")";
            diag.warnings.insert(diag.warnings.begin(), os.str());
        }
        sol.status = status;
        sol.values = st.values(y);
        sol.objective = g.dot(y);
        diag.message = std::move(message);
        return sol;
    };

    // best iterate seen so far, by the largest of the four measures
    struct Best {
        double score = std::numeric_limits<double>::infinity();
        Vector y;
        double rp = 0.0, rd = 0.0, re = 0.0, gap = 0.0;
        int iteration = 0;
    } best;
    auto converged = [&](double rp_, double rd_, double re_, double gap_) {
        return rp_ <= settings.gap_tol && rd_ <= settings.gap_tol && re_ <= settings.gap_tol &&
               gap_ <= settings.gap_tol;
    };

    int stalls = 0;
    std::string stop_reason = "iteration limit reached";
    double ray_radius = 0.0;       // best lower bound on |y| over feasible points
    double ray_iterate_norm = 0.0; // |y| when it was found
    for (int it = 0; it <= settings.max_iterations; ++it) {
        diag.iterations = it;
        const auto fy = st.forward(y);
        std::vector<Matrix> rd;
        std::vector<Matrix> slack;
        for (std::size_t l = 0; l < blocks.size(); ++l) {
            slack.push_back(blocks[l].c + fy[l]);
            rd.push_back(slack.back() - z[l]);
        }
        const Vector fx = st.adjoint(x);
        const Vector rp = g - fx - e.transpose() * w;
        const Vector re = f - e * y;

        double xz = 0.0;
        double cx = 0.0;
        for (std::size_t l = 0; l < blocks.size(); ++l) {
            xz += inner(x[l], z[l]);
            cx += inner(blocks[l].c, x[l]);
        }
        const double mu = xz / total_size;
        const double pobj = g.dot(y);
        const double dobj = -cx + f.dot(w);
        // residuals relative to the size of the terms that should cancel
        double terms_norm = 0.0;
        for (std::size_t l = 0; l < blocks.size(); ++l) terms_norm += st.adjoint_block(l, x[l]).norm();
        diag.primal_residual = rp.norm() / (1.0 + g_norm + terms_norm);
        diag.dual_residual = frob(rd) / (1.0 + c_norm);
        diag.equality_residual = re.norm() / (1.0 + f_norm);
        diag.gap = xz / (1.0 + std::abs(pobj) + std::abs(dobj));

        if (settings.verbose) {
            std::fprintf(stderr, "ipm %3d  pobj % .9e  dobj % .9e  rp %.2e  rd %.2e  re %.2e  mu %.2e\n", it, pobj,
                         dobj, diag.primal_residual, diag.dual_residual, diag.equality_residual, mu);
        }

        // feasibility problems stop at the first verified interior point
        if (feasibility_only && diag.equality_residual <= settings.gap_tol) {
            bool inside = true;
            for (const auto& s : slack) {
                if (min_eigenvalue(s) < 0.0) {
                    inside = false;
                    break;
                }
            }
            if (inside) return finish(Status::feasible, "feasible point found");
        }
        if (!feasibility_only && converged(diag.primal_residual, diag.dual_residual, diag.equality_residual, diag.gap)) {
            return finish(Status::optimal, "converged");
        }
        {
            const double score = std::max({diag.primal_residual, diag.dual_residual, diag.equality_residual, diag.gap});
            if (score < best.score) {
                best = Best{score, y, diag.primal_residual, diag.dual_residual, diag.equality_residual, diag.gap, it};
            }
        }

        // certificate of infeasibility for (D): X >= 0, F*(X) + E'w ~ 0, -<C,X> + f'w > 0
        if (dobj > 0.0) {
            const double ray = (fx + e.transpose() * w).norm();
            if (ray <= settings.infeas_tol * dobj) {
                return finish(Status::infeasible, "infeasibility certificate found");
            }
            // every feasible y has |y| >= dobj / ray (pair the ray with C + F(y) >= 0)
            const double radius = ray > 0.0 ? dobj / ray : std::numeric_limits<double>::infinity();
            if (radius > ray_radius) {
                ray_radius = radius;
                ray_iterate_norm = y.norm();
            }
        }
        if (it == settings.max_iterations) break;
        // once acceptable, give up sooner on a stagnating iteration
        const int patience = best.score <= settings.acceptable_tol ? 3 : 8;
        if (!feasibility_only && it - best.iteration >= patience) {
            stop_reason = "no progress in " + std::to_string(patience) + " iterations";
            break;
        }

        std::vector<Matrix> zi;
        for (const auto& zl : z) {
            Eigen::LLT<Matrix> llt(zl);
            if (llt.info() != Eigen::Success) break;
            zi.push_back(llt.solve(Matrix::Identity(zl.rows(), zl.cols())));
        }

        if (zi.size() != blocks.size()) {
            stop_reason = "slack lost definiteness";
            break;
        }

        const SchurSolver mfac(st.schur(x, zi));
        if (!mfac.ok()) {
            stop_reason = "Schur complement factorization failed";
            break;
        }
        if (mfac.regularization() > 0.0) {
            ++shifted_iterations;
            max_shift = std::max(max_shift, mfac.regularization());
        }
        Matrix mi_et;
        Eigen::LDLT<Matrix> sfac;
        if (ne > 0) {
            mi_et = mfac.solve(e.transpose());
            sfac.compute(e * mi_et);
        }

        // [M -E'; E 0] [dy; dw] = [h; r]
        auto kkt = [&](const Vector& h, const Vector& r) {
            const Vector mh = mfac.solve(h);
            if (ne == 0) return std::pair{Vector(mh), Vector(Vector::Zero(0))};
            const Vector dw = sfac.solve(r - e * mh);
            return std::pair{Vector(mh + mi_et * dw), dw};
        };
        // M applied through the operators themselves, for refinement
        auto hkm = [&](const Vector& v) {
            const auto fv = st.forward(v);
            std::vector<Matrix> t;
            for (std::size_t l = 0; l < blocks.size(); ++l) t.push_back(sym(x[l] * fv[l] * zi[l]));
            return st.adjoint(t);
        };
        auto direction = [&](const std::vector<Matrix>& rc) {
            Direction dir;
            std::vector<Matrix> rhs;
            for (std::size_t l = 0; l < blocks.size(); ++l) rhs.push_back(sym(rc[l] - x[l] * rd[l] * zi[l]));
            const Vector h = st.adjoint(rhs) - rp;
            std::tie(dir.dy, dir.dw) = kkt(h, re);
            // iterative refinement against the operators; the factored M is
            // only a preconditioner once it has been regularized
            // stops as soon as the residual no longer shrinks
            double last = std::numeric_limits<double>::infinity();
            Vector keep_dy;
            Vector keep_dw;
            for (int k = 0; k < 6; ++k) {
                const Vector r1 = h + e.transpose() * dir.dw - hkm(dir.dy);
                const Vector r2 = re - e * dir.dy;
                const double res = r1.norm() + r2.norm();
                if (res >= last) { // the last correction made things worse
                    dir.dy = keep_dy;
                    dir.dw = keep_dw;
                    break;
                }
                const bool slow = res > 0.5 * last;
                last = res;
                keep_dy = dir.dy;
                keep_dw = dir.dw;
                if (slow) break;
                const auto [ddy, ddw] = kkt(r1, r2);
                dir.dy += ddy;
                dir.dw += ddw;
            }
            const auto fdy = st.forward(dir.dy);
            for (std::size_t l = 0; l < blocks.size(); ++l) {
                dir.dz.push_back(fdy[l] + rd[l]);
                dir.dx.push_back(sym(rc[l] - x[l] * dir.dz.back() * zi[l]));
            }
            return dir;
        };
        auto steps = [&](const Direction& dir) {
            double ap = std::numeric_limits<double>::infinity();
            double ad = std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < blocks.size(); ++l) {
                ap = std::min(ap, max_step(x[l], dir.dx[l]));
                ad = std::min(ad, max_step(z[l], dir.dz[l]));
            }
            return std::pair{ap, ad};
        };

        // predictor
        std::vector<Matrix> rc;
        for (std::size_t l = 0; l < blocks.size(); ++l) rc.push_back(-x[l]);
        const Direction aff = direction(rc);
        auto [ap_aff, ad_aff] = steps(aff);
        ap_aff = std::min(1.0, ap_aff);
        ad_aff = std::min(1.0, ad_aff);
        double xz_aff = 0.0;
        for (std::size_t l = 0; l < blocks.size(); ++l) {
            xz_aff += inner(x[l] + ap_aff * aff.dx[l], z[l] + ad_aff * aff.dz[l]);
        }
        const double ratio = std::max(0.0, xz_aff / xz);
        const double sigma = std::min(1.0, ratio * ratio * ratio);

        // corrector
        for (std::size_t l = 0; l < blocks.size(); ++l) {
            rc[l] = sigma * mu * zi[l] - x[l] - aff.dx[l] * aff.dz[l] * zi[l];
        }
        Direction dir = direction(rc);
        auto [ap, ad] = steps(dir);
        // a collapsed corrector step: fall back to a pure centering step
        if (std::min(ap, ad) < 1e-3) {
            for (std::size_t l = 0; l < blocks.size(); ++l) rc[l] = mu * zi[l] - x[l];
            Direction centre = direction(rc);
            const auto [cp, cd] = steps(centre);
            if (std::min(cp, cd) > std::min(ap, ad)) {
                dir = std::move(centre);
                ap = cp;
                ad = cd;
            }
        }
        const double gamma = settings.step_fraction;
        ap = std::min(1.0, gamma * ap);
        ad = std::min(1.0, gamma * ad);

        // the eigenvalue step bound is computed in floating point; make sure
        // the new iterates still factor, shrinking the step if they don't
        std::vector<Matrix> xn(blocks.size());
        std::vector<Matrix> zn(blocks.size());
        for (int tries = 0; tries < 40; ++tries) {
            bool ok = true;
            for (std::size_t l = 0; l < blocks.size() && ok; ++l) {
                xn[l] = sym(x[l] + ap * dir.dx[l]);
                zn[l] = sym(z[l] + ad * dir.dz[l]);
                ok = Eigen::LLT<Matrix>(xn[l]).info() == Eigen::Success &&
                     Eigen::LLT<Matrix>(zn[l]).info() == Eigen::Success;
            }
            if (ok) break;
            ap *= 0.5;
            ad *= 0.5;
        }
        x = std::move(xn);
        z = std::move(zn);
        w += ap * dir.dw;
        y += ad * dir.dy;
        if (settings.verbose) std::fprintf(stderr, "      sigma %.2e  ap %.3e  ad %.3e\n", sigma, ap, ad);

        stalls = (ap < 1e-8 && ad < 1e-8) ? stalls + 1 : 0;
        if (stalls >= 3) {
            stop_reason = "step length stalled";
            break;
        }
    }

    // out of iterations or stalled: fall back to the best iterate seen
    if (best.y.size() == ny && !feasibility_only) {
        y = best.y;
        diag.primal_residual = best.rp;
        diag.dual_residual = best.rd;
        diag.equality_residual = best.re;
        diag.gap = best.gap;
        if (converged(best.rp, best.rd, best.re, best.gap)) {
            return finish(Status::optimal, "converged (" + stop_reason + " afterwards)");
        }
        if (best.score <= settings.acceptable_tol) {
            std::ostringstream os;
            os << "stopped at reduced accuracy " << best.score << " (target " << settings.gap_tol << "): " << stop_reason;
            diag.warnings.push_back(os.str());
            return finish(Status::optimal, "converged to acceptable accuracy");
        }
    }
    if (ray_radius >= settings.infeas_radius_ratio * (1.0 + ray_iterate_norm)) {
        std::ostringstream os;
        os << "approximate infeasibility certificate: no feasible point with |y| < " << ray_radius
           << " (iterates had |y| ~ " << ray_iterate_norm << "); " << stop_reason;
        diag.warnings.push_back(os.str());
        return finish(Status::infeasible, "approximate infeasibility certificate found");
    }
    const double loose = std::max(1e-5, 10.0 * settings.acceptable_tol);
    const bool close = diag.primal_residual <= loose && diag.dual_residual <= loose &&
                       diag.equality_residual <= loose && diag.gap <= loose;
    return finish(close ? Status::inaccurate : Status::failed, stop_reason);
}

SdpSolution solve(const SdpProblem& problem, const SolverSettings& settings, const SdpBackend& backend) {
    SdpSolution sol = backend.solve(problem, settings);
    if (sol.values.size() != problem.variables().size()) return sol;
    const Verification v = verify(problem, sol.values);
    sol.diagnostics.max_violation = v.max_violation;
    sol.diagnostics.blocks = v.blocks;
    if (sol.usable() && !v.passes(settings.feas_tol)) {
        sol.status = Status::inaccurate;
        std::ostringstream os;
        os << "verifier rejected solution: max eigenvalue violation " << v.max_violation << ", equality residual "
           << v.max_equality_residual;
        sol.diagnostics.warnings.push_back(os.str());
    }
    return sol;
}

SdpSolution solve(const SdpProblem& problem, const SolverSettings& settings) {
    const InteriorPointBackend backend;
    return solve(problem, settings, backend);
}

} // namespace kronlyap::sdp
