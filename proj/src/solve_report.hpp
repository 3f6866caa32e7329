#pragma once

#include "kronlyap/analysis.hpp"

namespace kronlyap::analysis::detail {

inline SolveReport make_report(const sdp::SdpSolution& sol, const std::string& backend) {
    SolveReport r;
    r.status = sol.status;
    r.backend = backend;
    r.iterations = sol.diagnostics.iterations;
    r.objective = sol.objective;
    r.max_violation = sol.diagnostics.max_violation;
    r.primal_residual = sol.diagnostics.primal_residual;
    r.dual_residual = sol.diagnostics.dual_residual;
    r.gap = sol.diagnostics.gap;
    r.message = sol.diagnostics.message;
    r.warnings = sol.diagnostics.warnings;
    return r;
}

inline Verdict verdict_of(sdp::Status s) {
    if (s == sdp::Status::optimal || s == sdp::Status::feasible) return Verdict::certified;
    if (s == sdp::Status::infeasible) return Verdict::infeasible;
    return Verdict::failed;
}

} // namespace kronlyap::analysis::detail
