#pragma once

// Fixed-step simulation of switched trajectories, impulse responses and
// worst-case runs, certificate monitoring, and 2-D level-set contours.
//
// The integrator is classical RK4 with the mode frozen over each step, so
// switching only happens on the time grid.

#include "kronlyap/analysis.hpp"
#include "kronlyap/system.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace kronlyap::sim {

inline constexpr double kDefaultDt = 1e-3;
inline constexpr double kDefaultHorizon = 20.0;
inline constexpr double kDefaultDwell = 0.05;
inline constexpr int kDefaultSignalCount = 100;

enum class SignalKind { fixed_mode, piecewise_random, worst_case };

struct SwitchingSignal {
    SignalKind kind = SignalKind::fixed_mode;
    std::size_t mode = 0; // fixed_mode only, 0-based
    double dwell = kDefaultDwell;
    std::uint64_t seed = 0;

    static SwitchingSignal fixed(std::size_t mode) { return {SignalKind::fixed_mode, mode, kDefaultDwell, 0}; }
    static SwitchingSignal random(std::uint64_t seed, double dwell = kDefaultDwell) {
        return {SignalKind::piecewise_random, 0, dwell, seed};
    }
};

// 0-based mode for each of `steps` integration steps. Random signals hold
// each mode for at least `dwell` seconds (rounded up to whole steps) and
// switch to a different mode when there is more than one.
[[nodiscard]] std::vector<std::size_t> mode_sequence(const SwitchingSignal& signal, std::size_t mode_count,
                                                     std::size_t steps, double dt);

struct Peak {
    double value = 0.0; // max |y|
    double time = 0.0;
};

struct TrajectoryRecord {
    double dt = 0.0;
    std::vector<double> times; // k * dt
    std::vector<Vector> states;
    // Per sample: 1-based mode for switched runs, lambda for worst-case
    // runs. The last sample repeats the value of the last step.
    std::vector<double> signal;
    std::vector<double> outputs; // c x, empty without an output row
    std::vector<double> values;  // V(x), empty unless attached

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] bool has_outputs() const noexcept { return !outputs.empty(); }
    [[nodiscard]] Peak peak_output() const;
};

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

// Integrates x' = A_sigma(t) x on [0, t_final]; the grid has
// ceil(t_final/dt) steps. Throws std::invalid_argument on bad arguments
// (including worst-case signals, which need a certificate) and
// IntegrationError when the state stops being finite.
[[nodiscard]] TrajectoryRecord simulate(const SwitchedLinearSystem& system, const SwitchingSignal& signal,
                                        const Vector& x0, double t_final = kDefaultHorizon, double dt = kDefaultDt);

// Pointwise worst case: at each step lambda is the vertex returned by
// analysis::worst_case_mode at the current lifted state. Needs an
// uncertainty description whose dimension matches the certificate.
[[nodiscard]] TrajectoryRecord simulate_worst_case(const SwitchedLinearSystem& system,
                                                   const analysis::QuadraticCertificate& cert, const Vector& x0,
                                                   double t_final = kDefaultHorizon, double dt = kDefaultDt);

// simulate() from x0 = b; requires b and c.
[[nodiscard]] TrajectoryRecord impulse_response(const SwitchedLinearSystem& system, const SwitchingSignal& signal,
                                                double t_final = kDefaultHorizon, double dt = kDefaultDt);

// Fills record.values with V at every sample.
void attach_values(TrajectoryRecord& record, const analysis::LevelFunction& v);

// max_k V(t_{k+1}) - V(t_k); -inf for records with fewer than two samples.
[[nodiscard]] double monitor(const analysis::LevelFunction& v, const TrajectoryRecord& record);
[[nodiscard]] double monitor(const analysis::QuadraticCertificate& cert, const TrajectoryRecord& record);
[[nodiscard]] double monitor(const analysis::AugmentedCertificate& cert, const TrajectoryRecord& record);

// Level sets in the plane.

struct BoundingBox {
    double x_min = -1.0;
    double x_max = 1.0;
    double y_min = -1.0;
    double y_max = 1.0;
};

struct Polyline {
    std::vector<Eigen::Vector2d> points; // closed curves repeat the first point at the end
    bool closed = false;
};

inline constexpr int kDefaultResolution = 200;

using PlaneFunction = std::function<double(const Eigen::Vector2d&)>;

// Marching squares on a (resolution+1)^2 grid. Curves are oriented with
// {f < level} on the left, so closed curves around sublevel regions run
// counter-clockwise and holes clockwise. Empty if the level is not crossed.
[[nodiscard]] std::vector<Polyline> contour_2d(const PlaneFunction& f, double level, const BoundingBox& box,
                                               int resolution = kDefaultResolution);

// Level set of a certificate's value function; requires n = 2.
[[nodiscard]] std::vector<Polyline> contour_2d(const analysis::LevelFunction& v, double level,
                                               const BoundingBox& box, int resolution = kDefaultResolution);

// Square box around `centre` whose boundary lies in {f > level}, found by
// doubling the half width (sampled, not proven). nullopt if the set is still
// cut by the box after max_doublings.
[[nodiscard]] std::optional<BoundingBox> enclosing_box(const PlaneFunction& f, double level,
                                                       const Eigen::Vector2d& centre, double half_width,
                                                       int max_doublings = 20, int samples_per_side = 256);

// Shoelace formula; positive for counter-clockwise vertex order.
[[nodiscard]] double signed_area(const std::vector<Eigen::Vector2d>& points);

// Sum of signed areas of the closed curves, i.e. the area of the sublevel
// set when it lies inside the box.
[[nodiscard]] double enclosed_area(const std::vector<Polyline>& curves);

} // namespace kronlyap::sim
