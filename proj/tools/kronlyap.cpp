// kronlyap: command-line driver.
//
// Exit codes: 0 success/feasible, 2 infeasible, 1 error (including solver
// failures and malformed input).

#include "kronlyap/analysis.hpp"
#include "kronlyap/io.hpp"
#include "kronlyap/sim.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace kronlyap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

struct Globals {
    std::optional<double> solver_tol;
    double dt = sim::kDefaultDt;
    double tmax = sim::kDefaultHorizon;
    std::uint64_t seed = 1;
    std::string output_dir = ".";
    bool verbose = false;
};

struct Common {
    std::string system_file;
    int level = 1;
    bool reduced = true;
    std::optional<double> eps;
};

struct ContourFlags {
    bool enabled = false;
    int resolution = sim::kDefaultResolution;
    std::vector<double> bbox; // xmin,xmax,ymin,ymax
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void print(const std::string& key, const std::string& value) { std::cout << key << ": " << value << "\n"; }
void print(const std::string& key, double value) { print(key, io::format_double(value)); }

analysis::AnalysisOptions analysis_options(const Globals& g, const Common& c) {
    analysis::AnalysisOptions o;
    o.coordinates = c.reduced ? analysis::Coordinates::reduced : analysis::Coordinates::full;
    o.margin = c.eps;
    if (g.solver_tol) o.solver.set_tolerance(*g.solver_tol);
    o.solver.verbose = g.verbose;
    return o;
}

fs::path output_path(const Globals& g, const std::string& stem, const Common& c, const std::string& suffix) {
    return fs::path(g.output_dir) / (stem + "_level" + std::to_string(c.level) + suffix);
}

Vector state_from(const std::vector<double>& values, const SwitchedLinearSystem& system, const std::string& flag) {
    if (static_cast<Eigen::Index>(values.size()) != system.dimension()) {
        throw UsageError(flag + " needs " + std::to_string(system.dimension()) + " comma-separated values");
    }
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void report_solver(const analysis::SolveReport& s) {
    print("solver_status", sdp::to_string(s.status));
    print("solver_iterations", std::to_string(s.iterations));
    print("solver_message", s.message);
    for (const auto& w : s.warnings) print("warning", w);
}

int verdict_exit(analysis::Verdict v) {
    switch (v) {
    case analysis::Verdict::certified: return kExitOk;
    case analysis::Verdict::infeasible: return kExitInfeasible;
    case analysis::Verdict::failed: break;
    }
    return kExitError;
}

int finish_outcome(analysis::Verdict v, const analysis::SolveReport& s) {
    print("status", analysis::to_string(v));
    report_solver(s);
    if (v == analysis::Verdict::failed) std::cerr << "error: solver failed: " << s.message << "\n";
    return verdict_exit(v);
}

void require_planar(const SwitchedLinearSystem& system, const ContourFlags& cf) {
    if (cf.enabled && system.dimension() != 2) {
        throw UsageError("contours are only available for planar systems (n = 2); this system has n = " +
                         std::to_string(system.dimension()));
    }
    if (cf.enabled && !cf.bbox.empty() && cf.bbox.size() != 4) throw UsageError("--bbox needs xmin,xmax,ymin,ymax");
    if (cf.resolution < 2) throw UsageError("--resolution must be >= 2");
}

// Writes the contour of {v = level}; returns the enclosed area when the
// curve is closed inside the box.
std::optional<double> write_contour(const analysis::LevelFunction& v, double level, const Eigen::Vector2d& centre,
                                    double scale, const ContourFlags& cf, const fs::path& path) {
    sim::BoundingBox box;
    if (!cf.bbox.empty()) {
        box = {cf.bbox[0], cf.bbox[1], cf.bbox[2], cf.bbox[3]};
    } else {
        const auto f = [&v](const Eigen::Vector2d& p) { return v(Vector(p)); };
        const auto found = sim::enclosing_box(f, level, centre, scale);
        if (!found) throw std::runtime_error("level set is unbounded in the searched region; pass --bbox");
        box = *found;
    }
    const auto curves = sim::contour_2d(v, level, box, cf.resolution);
    io::write_text(path, io::contour_csv(curves));
    print("contour", path.string());
    print("contour_segments", std::to_string(curves.size()));
    bool all_closed = !curves.empty();
    for (const auto& c : curves) all_closed = all_closed && c.closed;
    if (!all_closed) return std::nullopt;
    const double area = sim::enclosed_area(curves);
    print("area", area);
    return area;
}

// Runs seeded random switching signals from x0 and reports the largest
// value of v - bound along them; the first run is written as CSV.
void run_trajectories(const Globals& g, const SwitchedLinearSystem& system, const analysis::LevelFunction& v,
                      const Vector& x0, double bound, int count, const fs::path& path) {
    if (count <= 0) return;
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < count; ++k) {
        auto rec = sim::simulate(system, sim::SwitchingSignal::random(g.seed + static_cast<std::uint64_t>(k)), x0,
                                 g.tmax, g.dt);
        sim::attach_values(rec, v);
        for (double val : rec.values) worst = std::max(worst, val - bound);
        if (k == 0) {
            io::write_text(path, io::trajectory_csv(rec));
            print("trajectory", path.string());
        }
    }
    print("trajectories", std::to_string(count));
    print("max_excess", worst);
}

int cmd_stability(const Globals& g, const Common& c, const std::vector<double>& x0v) {
    const auto system = io::load_system(c.system_file);
    const auto opts = analysis_options(g, c);
    const fs::path path = output_path(g, "stability", c, ".json");
    if (!x0v.empty()) {
        // anchored variant: xi0' P xi0 = 1 instead of P >= I
        const Vector x0 = state_from(x0v, system, "--x0");
        const auto out = analysis::invariant_certificate(system, c.level, x0, {}, opts);
        if (out.ok()) {
            io::write_text(path, io::write_certificate({*out.value, std::nullopt}));
            print("certificate", path.string());
        }
        return finish_outcome(out.verdict, out.solver);
    }
    const auto out = analysis::check_stability(system, c.level, opts);
    if (out.ok()) {
        io::write_text(path, io::write_certificate({*out.value, std::nullopt}));
        print("certificate", path.string());
        print("margin", out.value->margin);
    }
    return finish_outcome(out.verdict, out.solver);
}

int cmd_reach(const Globals& g, const Common& c, const std::vector<double>& x0v, const std::string& normalization,
              const ContourFlags& cf, int trajectories) {
    const auto system = io::load_system(c.system_file);
    require_planar(system, cf);
    const Vector x0 = state_from(x0v, system, "--x0");
    analysis::ReachNormalization norm{};
    try {
        norm = analysis::reach_normalization_from_string(normalization);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto out = analysis::reach_certificate(system, x0, c.level, norm, analysis_options(g, c));
    if (out.ok()) {
        const auto& r = *out.value;
        const fs::path path = output_path(g, "reach", c, ".json");
        io::write_text(path, io::write_certificate({r.certificate, io::ReachInfo{r.x0, r.level_value, norm}}));
        print("certificate", path.string());
        print("level_value", r.level_value);
        const analysis::LevelFunction v(r.certificate);
        if (cf.enabled) {
            write_contour(v, r.level_value, Eigen::Vector2d::Zero(), std::max(1.0, 1.5 * x0.lpNorm<Eigen::Infinity>()),
                          cf, output_path(g, "reach", c, "_contour.csv"));
        }
        run_trajectories(g, system, v, x0, r.level_value, trajectories, output_path(g, "reach", c, "_trajectory.csv"));
    }
    return finish_outcome(out.verdict, out.solver);
}

int cmd_impulse(const Globals& g, const Common& c, bool sign_robust) {
    const auto system = io::load_system(c.system_file);
    if (!system.has_io()) throw UsageError("impulse bounds need input_b and output_c in the system file");
    const auto out = analysis::impulse_certificate(system, c.level, analysis_options(g, c));
    if (out.ok()) {
        const fs::path path = output_path(g, "impulse", c, ".json");
        io::write_text(path, io::write_certificate({*out.value, std::nullopt}));
        print("certificate", path.string());
        const auto pb = analysis::peak_bound(*out.value, *system.input_b(), *system.output_c(), sign_robust);
        print("lifted_bound", pb.nominal.lifted);
        print("upper_bound", pb.nominal.bound);
        if (pb.sign_robust) print("sign_robust_bound", pb.sign_robust->bound);
        for (const auto& w : pb.warnings) print("warning", w);
    }
    return finish_outcome(out.verdict, out.solver);
}

int cmd_worstcase(const Globals& g, const Common& c) {
    const auto system = io::load_system(c.system_file);
    if (!system.has_io()) throw UsageError("worst-case runs need input_b and output_c in the system file");
    if (!system.uncertainty()) throw UsageError("worst-case runs need an 'uncertainty' description");
    const auto out = analysis::impulse_certificate(system, c.level, analysis_options(g, c));
    if (out.ok()) {
        const auto& cert = *out.value;
        const fs::path path = output_path(g, "worstcase", c, ".json");
        io::write_text(path, io::write_certificate({cert, std::nullopt}));
        print("certificate", path.string());
        const auto pb = analysis::peak_bound(cert, *system.input_b(), *system.output_c(), false);
        auto rec = sim::simulate_worst_case(system, cert, *system.input_b(), g.tmax, g.dt);
        sim::attach_values(rec, analysis::LevelFunction(cert));
        const auto peak = rec.peak_output();
        const fs::path csv = output_path(g, "worstcase", c, "_trajectory.csv");
        io::write_text(csv, io::trajectory_csv(rec));
        print("trajectory", csv.string());
        print("lower_bound", peak.value);
        print("peak_time", peak.time);
        print("upper_bound", pb.nominal.bound);
        if (peak.value > pb.nominal.bound) print("warning", "simulated peak exceeds the certified bound");
    }
    return finish_outcome(out.verdict, out.solver);
}

int cmd_invariant(const Globals& g, const Common& c, const std::vector<double>& x0v, double lambda,
                  const ContourFlags& cf, int trajectories) {
    const auto system = io::load_system(c.system_file);
    require_planar(system, cf);
    const Vector x0 = state_from(x0v, system, "--x0");
    analysis::InvariantOptions inv;
    inv.lambda = lambda;
    const auto out = analysis::invariant_certificate(system, c.level, x0, inv, analysis_options(g, c));
    if (out.ok()) {
        const fs::path path = output_path(g, "invariant", c, ".json");
        io::write_text(path, io::write_certificate({*out.value, std::nullopt}));
        print("certificate", path.string());
        print("lambda", lambda);
        const analysis::LevelFunction v(*out.value);
        if (cf.enabled) {
            const Eigen::Vector2d centre = 0.5 * Eigen::Vector2d(x0(0), x0(1));
            write_contour(v, 0.0, centre, std::max(1.0, 1.5 * x0.lpNorm<Eigen::Infinity>()), cf,
                          output_path(g, "invariant", c, "_contour.csv"));
        }
        run_trajectories(g, system, v, x0, 0.0, trajectories, output_path(g, "invariant", c, "_trajectory.csv"));
    }
    return finish_outcome(out.verdict, out.solver);
}

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("system", c.system_file, "System description (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--level,-i", c.level, "Hierarchy level")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_flag("--reduced,!--full", c.reduced, "Reduced monomial coordinates (default) or full Kronecker ones");
    cmd->add_option("--eps", c.eps, "Decay margin (default: derived from the generators)")
        ->check(CLI::NonNegativeNumber);
}

void add_contour(CLI::App* cmd, ContourFlags& cf) {
    cmd->add_flag("--contour", cf.enabled, "Write the level set as contour CSV (n = 2 only)");
    cmd->add_option("--resolution", cf.resolution, "Contour grid cells per side")->capture_default_str();
    cmd->add_option("--bbox", cf.bbox, "Contour box xmin,xmax,ymin,ymax (default: automatic)")->delimiter(',');
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lyapunov certificates and bounds for switched linear systems via Kronecker lifts"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--solver-tol", g.solver_tol, "Solver tolerance (env KRONLYAP_SOLVER_TOL as fallback)")
        ->check(CLI::PositiveNumber);
    app.add_option("--dt", g.dt, "Integration step")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--tmax", g.tmax, "Simulation horizon")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--seed", g.seed, "Base seed of random switching signals")->capture_default_str();
    app.add_option("--output-dir,-o", g.output_dir, "Directory for certificates and CSV files")->capture_default_str();
    app.add_flag("--verbose,-v", g.verbose, "Print solver iterations");

    Common common;
    std::vector<double> x0;
    std::string normalization = "identity";
    ContourFlags contour;
    int trajectories = 0;
    bool sign_robust = false;
    double lambda = 0.0;

    auto* stability = app.add_subcommand("stability", "Search a common quadratic certificate on the lifted system");
    add_common(stability, common);
    stability->add_option("--x0", x0, "Anchor xi(x0)' P xi(x0) = 1 instead of P >= I")->delimiter(',');

    auto* reach = app.add_subcommand("reach", "Outer approximation of the reachable set from x0");
    add_common(reach, common);
    reach->add_option("--x0", x0, "Initial state, comma separated")->required()->delimiter(',');
    reach->add_option("--normalization", normalization, "identity or trace")->capture_default_str();
    add_contour(reach, contour);
    reach->add_option("--trajectories", trajectories, "Random switching runs checked against the set")
        ->check(CLI::NonNegativeNumber);

    auto* impulse = app.add_subcommand("impulse", "Upper bound on the impulse-response peak");
    add_common(impulse, common);
    impulse->add_flag("--sign-robust", sign_robust, "Also report the bound robust to the sign of odd powers");

    auto* worst = app.add_subcommand("worstcase", "Worst-case trajectory and lower bound on the impulse peak");
    add_common(worst, common);

    auto* invariant = app.add_subcommand("invariant", "S-procedure invariant set anchored at x0");
    add_common(invariant, common);
    invariant->add_option("--x0", x0, "Anchor state, comma separated")->required()->delimiter(',');
    invariant->add_option("--lambda", lambda, "S-procedure multiplier")->capture_default_str();
    add_contour(invariant, contour);
    invariant->add_option("--trajectories", trajectories, "Random switching runs checked against the set")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    }

    try {
        if (*stability) return cmd_stability(g, common, x0);
        if (*reach) return cmd_reach(g, common, x0, normalization, contour, trajectories);
        if (*impulse) return cmd_impulse(g, common, sign_robust);
        if (*worst) return cmd_worstcase(g, common);
        if (*invariant) return cmd_invariant(g, common, x0, lambda, contour, trajectories);
    } catch (const io::FormatError& e) {
        std::cerr << "error: malformed input: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kExitError;
}
