#include "kronlyap/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace kronlyap::sim {

namespace {

std::size_t step_count(double t_final, double dt) {
    if (!(t_final > 0.0) || !std::isfinite(t_final)) throw std::invalid_argument("simulation horizon must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive");
    // tolerate t_final/dt landing a hair above an integer
    return static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
}

// One classical RK4 step of x' = A x.
Vector rk4(const Matrix& a, const Vector& x, double h) {
    const Vector k1 = a * x;
    const Vector k2 = a * (x + 0.5 * h * k1);
    const Vector k3 = a * (x + 0.5 * h * k2);
    const Vector k4 = a * (x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

[[noreturn]] void blow_up(double t) {
    std::ostringstream os;
    os << "integration failure: state is not finite at t=" << t;
    throw IntegrationError(os.str(), t);
}

TrajectoryRecord start_record(const SwitchedLinearSystem& system, const Vector& x0, std::size_t steps, double dt) {
    if (x0.size() != system.dimension()) throw std::invalid_argument("initial state has wrong dimension");
    if (!x0.allFinite()) throw std::invalid_argument("initial state is not finite");
    TrajectoryRecord rec;
    rec.dt = dt;
    rec.times.reserve(steps + 1);
    rec.states.reserve(steps + 1);
    rec.signal.reserve(steps + 1);
    rec.times.push_back(0.0);
    rec.states.push_back(x0);
    return rec;
}

void finish_record(const SwitchedLinearSystem& system, TrajectoryRecord& rec) {
    if (!rec.signal.empty()) rec.signal.push_back(rec.signal.back());
    if (system.output_c()) {
        const RowVector& c = *system.output_c();
        rec.outputs.reserve(rec.states.size());
        for (const auto& x : rec.states) rec.outputs.push_back(c.dot(x));
    }
}

} // namespace

std::vector<std::size_t> mode_sequence(const SwitchingSignal& signal, std::size_t mode_count, std::size_t steps,
                                       double dt) {
    if (mode_count == 0) throw std::invalid_argument("system has no modes");
    switch (signal.kind) {
    case SignalKind::fixed_mode:
        if (signal.mode >= mode_count) throw std::invalid_argument("fixed mode index out of range");
        return std::vector<std::size_t>(steps, signal.mode);
    case SignalKind::worst_case:
        throw std::invalid_argument("worst-case signals are state dependent; use simulate_worst_case");
    case SignalKind::piecewise_random:
        break;
    }
    if (!(signal.dwell > 0.0) || !std::isfinite(signal.dwell)) throw std::invalid_argument("dwell must be positive");
    if (dt > 0.5 * signal.dwell * (1.0 + 1e-12)) throw std::invalid_argument("time step must be at most dwell/2");

    std::mt19937_64 rng(signal.seed);
    std::uniform_int_distribution<std::size_t> pick(0, mode_count - 1);
    std::uniform_int_distribution<std::size_t> other(0, mode_count >= 2 ? mode_count - 2 : 0);
    std::exponential_distribution<double> extra(1.0 / signal.dwell);

    std::vector<std::size_t> out;
    out.reserve(steps);
    std::size_t mode = pick(rng);
    while (out.size() < steps) {
        const double hold = signal.dwell + extra(rng);
        const auto hold_steps = static_cast<std::size_t>(std::ceil(hold / dt - 1e-9));
        out.insert(out.end(), std::min(hold_steps, steps - out.size()), mode);
        if (mode_count > 1) {
            const std::size_t j = other(rng);
            mode = j >= mode ? j + 1 : j; // uniform over the other modes
        }
    }
    return out;
}

Peak TrajectoryRecord::peak_output() const {
    Peak p;
    for (std::size_t k = 0; k < outputs.size(); ++k) {
        if (std::abs(outputs[k]) > p.value) p = {std::abs(outputs[k]), times[k]};
    }
    return p;
}

TrajectoryRecord simulate(const SwitchedLinearSystem& system, const SwitchingSignal& signal, const Vector& x0,
                          double t_final, double dt) {
    const std::size_t steps = step_count(t_final, dt);
    const auto modes = mode_sequence(signal, system.mode_count(), steps, dt);
    TrajectoryRecord rec = start_record(system, x0, steps, dt);
    Vector x = x0;
    for (std::size_t k = 0; k < steps; ++k) {
        x = rk4(system.mode(modes[k]), x, dt);
        const double t = static_cast<double>(k + 1) * dt;
        if (!x.allFinite()) blow_up(t);
        rec.times.push_back(t);
        rec.states.push_back(x);
        rec.signal.push_back(static_cast<double>(modes[k] + 1));
    }
    finish_record(system, rec);
    return rec;
}

TrajectoryRecord simulate_worst_case(const SwitchedLinearSystem& system, const analysis::QuadraticCertificate& cert,
                                     const Vector& x0, double t_final, double dt) {
    if (!system.uncertainty()) throw std::invalid_argument("worst-case simulation needs an uncertainty description");
    if (cert.n != static_cast<std::size_t>(system.dimension())) {
        throw std::invalid_argument("certificate and system dimensions differ");
    }
    const std::size_t steps = step_count(t_final, dt);
    const auto model = analysis::build_model(system, cert.level, cert.coordinates);
    if (cert.p.rows() != model.dimension() || cert.p.cols() != model.dimension()) {
        throw std::invalid_argument("certificate dimension does not match its level");
    }
    const Matrix& delta = *model.uncertainty;
    const analysis::StateLift lift = model.lift();
    const Uncertainty& u = *system.uncertainty();
    const Matrix a_hi = system.uncertain_matrix(u.hi);
    const Matrix a_lo = system.uncertain_matrix(u.lo);

    TrajectoryRecord rec = start_record(system, x0, steps, dt);
    Vector x = x0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double lambda = analysis::worst_case_mode(cert.p, delta, lift(x), u.lo, u.hi);
        x = rk4(lambda == u.hi ? a_hi : a_lo, x, dt);
        const double t = static_cast<double>(k + 1) * dt;
        if (!x.allFinite()) blow_up(t);
        rec.times.push_back(t);
        rec.states.push_back(x);
        rec.signal.push_back(lambda);
    }
    finish_record(system, rec);
    return rec;
}

TrajectoryRecord impulse_response(const SwitchedLinearSystem& system, const SwitchingSignal& signal, double t_final,
                                  double dt) {
    if (!system.has_io()) throw std::invalid_argument("impulse response needs an input vector and an output row");
    return simulate(system, signal, *system.input_b(), t_final, dt);
}

void attach_values(TrajectoryRecord& record, const analysis::LevelFunction& v) {
    record.values.clear();
    record.values.reserve(record.states.size());
    for (const auto& x : record.states) record.values.push_back(v(x));
}

double monitor(const analysis::LevelFunction& v, const TrajectoryRecord& record) {
    double worst = -std::numeric_limits<double>::infinity();
    if (record.states.size() < 2) return worst;
    double prev = v(record.states.front());
    for (std::size_t k = 1; k < record.states.size(); ++k) {
        const double cur = v(record.states[k]);
        worst = std::max(worst, cur - prev);
        prev = cur;
    }
    return worst;
}

double monitor(const analysis::QuadraticCertificate& cert, const TrajectoryRecord& record) {
    return monitor(analysis::LevelFunction(cert), record);
}

double monitor(const analysis::AugmentedCertificate& cert, const TrajectoryRecord& record) {
    return monitor(analysis::LevelFunction(cert), record);
}

} // namespace kronlyap::sim
