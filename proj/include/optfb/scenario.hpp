#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "optfb/evolve.hpp"
#include "optfb/trajectories.hpp"

namespace optfb {

// Error taxonomy mapped to CLI exit codes.
struct ConfigError : std::runtime_error {      // exit 2
    using std::runtime_error::runtime_error;
};
struct UnphysicalError : std::runtime_error {  // exit 3
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {   // exit 4
    using std::runtime_error::runtime_error;
};
struct CompareFailure : std::runtime_error {   // exit 5
    using std::runtime_error::runtime_error;
};

enum class SchemeKind {
    Single,          // damped cavity, optional (N, M, beta) bath
    MirrorLoop,      // gamma, phi
    IntensityExpanded,
    IntensityLindblad,
    Quadrature,      // Y
    Complex,         // A
    Heterodyne,      // X, Y
    HeterodyneMirrorAnalog, // gamma, phi
    TwoModeQuadrature,      // J on source, gamma2, driven_dim
    TwoModeIntensity,       // K on source, gamma2, driven_dim
    TwoModeComplex          // g, mu, gamma2, driven_dim
};

enum class RunMode { Master, Steady, Trajectories, Spectrum, Compare, LindbladCheck };
enum class TrajectoryKind { Jump, Homodyne, Heterodyne };

struct Scenario {
    SchemeKind scheme;
    RunMode mode;
    int dim = 20;
    int driven_dim = 4;
    BathParams bath;
    // operator expressions, resolved against the source space at build time
    std::string Y_expr, X_expr, Z_expr, A_expr, H0_expr = "0*I";
    std::string J_expr, K_expr;
    double gamma = 1.0, phi = 0.0, gamma2 = 200.0;
    double g = 0.0, mu = 0.0;

    double dt = 1e-3;
    double t_final = 10.0;
    int stride = 10;

    // initial state: fock level or coherent amplitude (fock wins if both unset -> vacuum)
    int fock_n = 0;
    std::optional<Complex> coherent_alpha;

    std::vector<std::string> outputs{"x", "y", "n", "Vx", "Vy"};

    // trajectories mode
    TrajectoryKind traj_kind = TrajectoryKind::Homodyne;
    int n_traj = 500;
    std::uint64_t seed = 1;
    double traj_dt = 1e-4;

    // spectrum mode
    double lambda = 1.0, spec_mu = -1.0, tau = 0.0;
    double omega_min = 0.0, omega_max = 5.0;
    int omega_count = 101;

    // compare mode
    double compare_gamma2 = 200.0;
    double compare_threshold = 5e-2;

    std::string config_hash; // FNV-1a of the raw config text
    std::string raw_text;
};

Scenario parse_scenario(const std::string& text);

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance; // compare threshold
};

// Executes the scenario, writing CSV + summary.json under out_dir.
// Returns a short human-readable status line.
std::string run_scenario(const Scenario& sc, const std::string& out_dir,
                         const RunOverrides& overrides = {});

// Builds just the generator described by the scenario (master/steady schemes).
Liouvillian build_generator(const Scenario& sc);

} // namespace optfb
