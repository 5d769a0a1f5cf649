#include "optfb/scenario.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <unsupported/Eigen/KroneckerProduct>

#include "optfb/expr.hpp"
#include "optfb/linear_model.hpp"

namespace optfb {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config error at " + path + ": " + msg);
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            config_fail(path + "." + it.key(), "unknown key");
}

double get_number(const json& obj, const std::string& path, const std::string& key,
                  double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) config_fail(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& path, const std::string& key,
            int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) config_fail(path + "." + key, "expected an integer");
    return obj[key].get<int>();
}

std::string get_string(const json& obj, const std::string& path,
                       const std::string& key, const std::string& fallback,
                       bool required = false) {
    if (!obj.contains(key)) {
        if (required) config_fail(path + "." + key, "missing required field");
        return fallback;
    }
    if (!obj[key].is_string()) config_fail(path + "." + key, "expected a string");
    return obj[key].get<std::string>();
}

Complex get_complex(const json& obj, const std::string& path, const std::string& key,
                    Complex fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj[key];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        config_fail(path + "." + key, "expected a [re, im] pair");
    return {v[0].get<double>(), v[1].get<double>()};
}

std::string fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvWriter {
    std::ofstream out;

    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        out.open(path, std::ios::binary);
        if (!out) throw NumericalError("cannot open output file " + path.string());
        for (size_t i = 0; i < header.size(); ++i)
            out << (i ? "," : "") << header[i];
        out << "\n";
    }
    void row(const std::vector<double>& values) {
        for (size_t i = 0; i < values.size(); ++i)
            out << (i ? "," : "") << fmt_double(values[i]);
        out << "\n";
    }
};

SchemeKind parse_scheme_kind(const std::string& name, const std::string& path) {
    if (name == "single") return SchemeKind::Single;
    if (name == "mirror-loop") return SchemeKind::MirrorLoop;
    if (name == "intensity-expanded") return SchemeKind::IntensityExpanded;
    if (name == "intensity-lindblad") return SchemeKind::IntensityLindblad;
    if (name == "quadrature") return SchemeKind::Quadrature;
    if (name == "complex") return SchemeKind::Complex;
    if (name == "heterodyne") return SchemeKind::Heterodyne;
    if (name == "heterodyne-mirror-analog") return SchemeKind::HeterodyneMirrorAnalog;
    if (name == "two-mode-quadrature") return SchemeKind::TwoModeQuadrature;
    if (name == "two-mode-intensity") return SchemeKind::TwoModeIntensity;
    if (name == "two-mode-complex") return SchemeKind::TwoModeComplex;
    config_fail(path, "unknown scheme type '" + name + "'");
}

} // namespace

Scenario parse_scenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be an object");
    reject_unknown_keys(root, "$", {"scheme", "bath", "truncation", "solver", "mode",
                                    "initial_state", "outputs"});

    Scenario sc;
    sc.raw_text = text;
    sc.config_hash = fnv1a_hash(text);

    if (!root.contains("scheme")) config_fail("$.scheme", "missing required field");
    const json& scheme = root["scheme"];
    if (!scheme.is_object()) config_fail("$.scheme", "expected an object");
    reject_unknown_keys(scheme, "$.scheme",
                        {"type", "Y", "X", "Z", "A", "H0", "J", "K",
                         "gamma", "phi", "gamma2", "g", "mu"});
    sc.scheme = parse_scheme_kind(get_string(scheme, "$.scheme", "type", "", true),
                                  "$.scheme.type");
    sc.Y_expr = get_string(scheme, "$.scheme", "Y", "");
    sc.X_expr = get_string(scheme, "$.scheme", "X", "");
    sc.Z_expr = get_string(scheme, "$.scheme", "Z", "");
    sc.A_expr = get_string(scheme, "$.scheme", "A", "");
    sc.J_expr = get_string(scheme, "$.scheme", "J", "");
    sc.K_expr = get_string(scheme, "$.scheme", "K", "");
    sc.H0_expr = get_string(scheme, "$.scheme", "H0", "0*I");
    sc.gamma = get_number(scheme, "$.scheme", "gamma", 1.0);
    sc.phi = get_number(scheme, "$.scheme", "phi", 0.0);
    sc.gamma2 = get_number(scheme, "$.scheme", "gamma2", 200.0);
    sc.g = get_number(scheme, "$.scheme", "g", 0.0);
    sc.mu = get_number(scheme, "$.scheme", "mu", 0.0);

    auto require_expr = [&](const std::string& expr, const char* key) {
        if (expr.empty())
            config_fail(std::string("$.scheme.") + key, "missing required field");
    };
    switch (sc.scheme) {
        case SchemeKind::Quadrature: require_expr(sc.Y_expr, "Y"); break;
        case SchemeKind::Complex: require_expr(sc.A_expr, "A"); break;
        case SchemeKind::Heterodyne:
            require_expr(sc.X_expr, "X");
            require_expr(sc.Y_expr, "Y");
            break;
        case SchemeKind::IntensityExpanded:
        case SchemeKind::IntensityLindblad: require_expr(sc.Z_expr, "Z"); break;
        case SchemeKind::TwoModeQuadrature: require_expr(sc.J_expr, "J"); break;
        case SchemeKind::TwoModeIntensity: require_expr(sc.K_expr, "K"); break;
        default: break;
    }

    if (root.contains("bath")) {
        const json& bath = root["bath"];
        if (!bath.is_object()) config_fail("$.bath", "expected an object");
        reject_unknown_keys(bath, "$.bath", {"N", "M", "beta"});
        sc.bath.N = get_number(bath, "$.bath", "N", 0.0);
        sc.bath.M = get_complex(bath, "$.bath", "M", {0.0, 0.0});
        sc.bath.beta = get_complex(bath, "$.bath", "beta", {0.0, 0.0});
        if (sc.bath.N < 0.0) throw UnphysicalError("bath.N must be nonnegative");
        if (!sc.bath.physical())
            throw UnphysicalError("unphysical bath: |M|^2 > N(N+1)");
    }

    if (root.contains("truncation")) {
        const json& tr = root["truncation"];
        if (!tr.is_object()) config_fail("$.truncation", "expected an object");
        reject_unknown_keys(tr, "$.truncation", {"dim", "driven_dim"});
        sc.dim = get_int(tr, "$.truncation", "dim", sc.dim);
        sc.driven_dim = get_int(tr, "$.truncation", "driven_dim", sc.driven_dim);
        if (sc.dim < 2) config_fail("$.truncation.dim", "must be at least 2");
        if (sc.driven_dim < 2) config_fail("$.truncation.driven_dim", "must be at least 2");
    }

    if (root.contains("solver")) {
        const json& so = root["solver"];
        if (!so.is_object()) config_fail("$.solver", "expected an object");
        reject_unknown_keys(so, "$.solver", {"dt", "t_final", "stride", "traj_dt"});
        sc.dt = get_number(so, "$.solver", "dt", sc.dt);
        sc.t_final = get_number(so, "$.solver", "t_final", sc.t_final);
        sc.stride = get_int(so, "$.solver", "stride", sc.stride);
        sc.traj_dt = get_number(so, "$.solver", "traj_dt", sc.traj_dt);
        if (sc.dt <= 0.0) config_fail("$.solver.dt", "must be positive");
        if (sc.traj_dt <= 0.0) config_fail("$.solver.traj_dt", "must be positive");
        if (sc.t_final < 0.0) config_fail("$.solver.t_final", "must be nonnegative");
        if (sc.stride < 1) config_fail("$.solver.stride", "must be at least 1");
    }

    if (!root.contains("mode")) config_fail("$.mode", "missing required field");
    const json& mode = root["mode"];
    if (!mode.is_object()) config_fail("$.mode", "expected an object");
    reject_unknown_keys(mode, "$.mode",
                        {"type", "unraveling", "n", "seed", "lambda", "mu", "tau",
                         "omega_min", "omega_max", "omega_count",
                         "gamma2", "threshold"});
    std::string mode_name = get_string(mode, "$.mode", "type", "", true);
    if (mode_name == "master") sc.mode = RunMode::Master;
    else if (mode_name == "steady") sc.mode = RunMode::Steady;
    else if (mode_name == "trajectories") sc.mode = RunMode::Trajectories;
    else if (mode_name == "spectrum") sc.mode = RunMode::Spectrum;
    else if (mode_name == "compare") sc.mode = RunMode::Compare;
    else if (mode_name == "lindblad-check") sc.mode = RunMode::LindbladCheck;
    else config_fail("$.mode.type", "unknown mode '" + mode_name + "'");

    if (sc.mode == RunMode::Trajectories) {
        std::string kind = get_string(mode, "$.mode", "unraveling", "homodyne");
        if (kind == "jump") sc.traj_kind = TrajectoryKind::Jump;
        else if (kind == "homodyne") sc.traj_kind = TrajectoryKind::Homodyne;
        else if (kind == "heterodyne") sc.traj_kind = TrajectoryKind::Heterodyne;
        else config_fail("$.mode.unraveling", "unknown unraveling '" + kind + "'");
        sc.n_traj = get_int(mode, "$.mode", "n", sc.n_traj);
        if (sc.n_traj < 2) config_fail("$.mode.n", "must be at least 2");
        sc.seed = static_cast<std::uint64_t>(get_int(mode, "$.mode", "seed", 1));
    }
    if (sc.mode == RunMode::Spectrum) {
        sc.lambda = get_number(mode, "$.mode", "lambda", sc.lambda);
        sc.spec_mu = get_number(mode, "$.mode", "mu", sc.spec_mu);
        sc.tau = get_number(mode, "$.mode", "tau", sc.tau);
        sc.omega_min = get_number(mode, "$.mode", "omega_min", sc.omega_min);
        sc.omega_max = get_number(mode, "$.mode", "omega_max", sc.omega_max);
        sc.omega_count = get_int(mode, "$.mode", "omega_count", sc.omega_count);
        if (sc.omega_count < 1) config_fail("$.mode.omega_count", "must be positive");
        if (sc.lambda < 0.0) throw UnphysicalError("mode.lambda must be nonnegative");
    }
    if (sc.mode == RunMode::Compare) {
        sc.compare_gamma2 = get_number(mode, "$.mode", "gamma2", sc.compare_gamma2);
        sc.compare_threshold = get_number(mode, "$.mode", "threshold", sc.compare_threshold);
        if (sc.compare_gamma2 <= 0.0) config_fail("$.mode.gamma2", "must be positive");
    }

    if (root.contains("initial_state")) {
        const json& st = root["initial_state"];
        if (!st.is_object()) config_fail("$.initial_state", "expected an object");
        reject_unknown_keys(st, "$.initial_state", {"type", "n", "alpha"});
        std::string type = get_string(st, "$.initial_state", "type", "vacuum");
        if (type == "vacuum") {
            sc.fock_n = 0;
        } else if (type == "fock") {
            sc.fock_n = get_int(st, "$.initial_state", "n", 0);
            if (sc.fock_n < 0) config_fail("$.initial_state.n", "must be nonnegative");
        } else if (type == "coherent") {
            sc.coherent_alpha = get_complex(st, "$.initial_state", "alpha", {0.0, 0.0});
        } else {
            config_fail("$.initial_state.type", "unknown state '" + type + "'");
        }
    }

    if (root.contains("outputs")) {
        const json& outs = root["outputs"];
        if (!outs.is_array()) config_fail("$.outputs", "expected an array of names");
        sc.outputs.clear();
        for (const auto& o : outs) {
            if (!o.is_string()) config_fail("$.outputs", "entries must be strings");
            std::string name = o.get<std::string>();
            if (name != "x" && name != "y" && name != "n" && name != "Vx" && name != "Vy")
                config_fail("$.outputs", "unknown observable '" + name + "'");
            sc.outputs.push_back(name);
        }
        if (sc.outputs.empty()) config_fail("$.outputs", "must not be empty");
    }
    return sc;
}

namespace {

Op scenario_h0(const Scenario& sc, const Space& space) {
    try {
        return parse_operator_expr(sc.H0_expr, space);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("$.scheme.H0: ") + e.what());
    }
}

Op parse_or_config_error(const std::string& expr, const Space& space,
                         const char* key) {
    try {
        return parse_operator_expr(expr, space);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("$.scheme.") + key + ": " + e.what());
    }
}

DensityMatrix initial_state(const Scenario& sc, const Space& space) {
    if (sc.coherent_alpha)
        return pure_state(space, coherent_vector(space, *sc.coherent_alpha));
    if (sc.fock_n >= space.dim)
        throw ConfigError("$.initial_state.n: level exceeds truncation");
    return fock_state(space, sc.fock_n);
}

struct ObservableSet {
    std::vector<std::string> names;
    std::vector<Op> first_moment; // x, y, n
    std::vector<Op> squares;      // for Vx, Vy
};

// values for a single state, in the order of sc.outputs
std::vector<double> eval_outputs(const Scenario& sc, const DensityMatrix& rho,
                                 const Space& space) {
    auto [x, y] = quadratures(space);
    std::vector<double> row;
    for (const auto& name : sc.outputs) {
        if (name == "x") row.push_back(expect(x, rho).real());
        else if (name == "y") row.push_back(expect(y, rho).real());
        else if (name == "n") row.push_back(expect(number_op(space), rho).real());
        else if (name == "Vx") row.push_back(variance(x, rho));
        else row.push_back(variance(y, rho));
    }
    return row;
}

} // namespace

Liouvillian build_generator(const Scenario& sc) {
    Space space = make_space(sc.dim);
    Op H0 = scenario_h0(sc, space);
    try {
        switch (sc.scheme) {
            case SchemeKind::Single:
                return single_cavity_liouvillian(annihilation(space), sc.gamma, sc.bath, H0);
            case SchemeKind::MirrorLoop:
                return mirror_loop_liouvillian(space, sc.gamma, sc.phi);
            case SchemeKind::IntensityExpanded:
                return intensity_feedback_liouvillian(
                    parse_or_config_error(sc.Z_expr, space, "Z"), H0, IntensityForm::Expanded);
            case SchemeKind::IntensityLindblad:
                return intensity_feedback_liouvillian(
                    parse_or_config_error(sc.Z_expr, space, "Z"), H0, IntensityForm::Lindblad);
            case SchemeKind::Quadrature:
                return quadrature_feedback_liouvillian(
                    parse_or_config_error(sc.Y_expr, space, "Y"), H0, sc.bath);
            case SchemeKind::Complex:
                return complex_feedback_liouvillian(
                    parse_or_config_error(sc.A_expr, space, "A"), H0, sc.bath);
            case SchemeKind::Heterodyne:
                return heterodyne_feedback_liouvillian(
                    parse_or_config_error(sc.X_expr, space, "X"),
                    parse_or_config_error(sc.Y_expr, space, "Y"), H0, sc.bath);
            case SchemeKind::HeterodyneMirrorAnalog:
                return heterodyne_mirror_analog_liouvillian(space, sc.gamma, sc.phi);
            case SchemeKind::TwoModeQuadrature:
                return two_mode_feedback_liouvillian(
                    QuadratureCoupling{parse_or_config_error(sc.J_expr, space, "J")},
                    sc.gamma2, H0, sc.driven_dim);
            case SchemeKind::TwoModeIntensity:
                return two_mode_feedback_liouvillian(
                    IntensityCoupling{parse_or_config_error(sc.K_expr, space, "K")},
                    sc.gamma2, H0, sc.driven_dim);
            case SchemeKind::TwoModeComplex:
                return two_mode_feedback_liouvillian(
                    ComplexAmplitudeCoupling{sc.g, sc.mu}, sc.gamma2, H0, sc.driven_dim);
        }
    } catch (const std::invalid_argument& e) {
        throw UnphysicalError(e.what());
    }
    throw ConfigError("unhandled scheme");
}

namespace {

json bath_json(const BathParams& b) {
    return {{"N", b.N},
            {"M", {b.M.real(), b.M.imag()}},
            {"beta", {b.beta.real(), b.beta.imag()}}};
}

void write_summary(const std::filesystem::path& out_dir, const Scenario& sc,
                   json derived, double wall_seconds) {
    json summary = {
        {"config_hash", sc.config_hash},
        {"bath", bath_json(sc.bath)},
        {"truncation", {{"dim", sc.dim}, {"driven_dim", sc.driven_dim}}},
        {"solver", {{"dt", sc.dt}, {"t_final", sc.t_final}, {"stride", sc.stride},
                    {"traj_dt", sc.traj_dt}}},
        {"derived", std::move(derived)},
        {"wall_seconds", wall_seconds},
    };
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir / "summary.json", std::ios::binary);
    out << summary.dump(2) << "\n";
}

// trace distance (1/2)||rho - sigma||_1
double trace_distance(const Matrix& a, const Matrix& b) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * ((a - b) + (a - b).adjoint()),
                                             Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

} // namespace

std::string run_scenario(const Scenario& sc_in, const std::string& out_dir_s,
                         const RunOverrides& overrides) {
    Scenario sc = sc_in;
    if (overrides.seed) sc.seed = *overrides.seed;
    if (overrides.tolerance) sc.compare_threshold = *overrides.tolerance;

    auto t_start = std::chrono::steady_clock::now();
    auto wall = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };
    // output directory is created lazily by the writers, so validation
    // failures leave no artifacts behind
    std::filesystem::path out_dir(out_dir_s);
    Space space = make_space(sc.dim);

    try {
        switch (sc.mode) {
            case RunMode::Master: {
                Liouvillian L = build_generator(sc);
                DensityMatrix rho0 = sc.scheme == SchemeKind::TwoModeQuadrature ||
                                     sc.scheme == SchemeKind::TwoModeIntensity ||
                                     sc.scheme == SchemeKind::TwoModeComplex
                    ? DensityMatrix(L.space,
                                    Eigen::kroneckerProduct(initial_state(sc, space).mat,
                                                            vacuum_state(make_space(sc.driven_dim)).mat))
                    : initial_state(sc, space);
                PropagateOptions opts;
                opts.dt = sc.dt;
                opts.output_stride = sc.stride;
                opts.store_states = true;
                EvolutionResult res = propagate(L, rho0, sc.t_final, opts);
                std::vector<std::string> header{"time"};
                for (const auto& o : sc.outputs) header.push_back(o);
                CsvWriter csv(out_dir / "master.csv", header);
                bool two_mode = !L.space.atomic();
                for (size_t i = 0; i < res.times.size(); ++i) {
                    DensityMatrix src = two_mode ? partial_trace(res.states[i], 1)
                                                 : res.states[i];
                    std::vector<double> row{res.times[i]};
                    for (double v : eval_outputs(sc, src, space)) row.push_back(v);
                    csv.row(row);
                }
                write_summary(out_dir, sc,
                              {{"boundary_leakage", res.boundary_leakage},
                               {"trace_drift", res.trace_drift},
                               {"leakage_flagged", res.boundary_leakage > default_policy().leakage_warn}},
                              wall());
                return "master: " + std::to_string(res.times.size()) + " samples";
            }
            case RunMode::Steady: {
                Liouvillian L = build_generator(sc);
                DensityMatrix rho = steady_state(L);
                DensityMatrix src = L.space.atomic() ? rho : partial_trace(rho, 1);
                std::vector<std::string> header = sc.outputs;
                CsvWriter csv(out_dir / "steady.csv", header);
                csv.row(eval_outputs(sc, src, space));
                json derived = {{"boundary_leakage", src.boundary_leakage()}};
                auto [x, y] = quadratures(space);
                derived["Vx"] = variance(x, src);
                derived["Vy"] = variance(y, src);
                derived["n"] = expect(number_op(space), src).real();
                write_summary(out_dir, sc, derived, wall());
                return "steady: Vx=" + fmt_double(variance(x, src));
            }
            case RunMode::Trajectories: {
                Op H0 = scenario_h0(sc, space);
                Op c1 = annihilation(space);
                auto [x, y] = quadratures(space);
                TrajectoryOptions topts;
                topts.dt = sc.traj_dt;
                topts.sample_stride = std::max(1, int(std::lround(sc.dt * sc.stride / sc.traj_dt)));
                topts.observables = {{"x", x}, {"y", y},
                                     {"n", Op(space, number_op(space).mat)},
                                     {"xx", Op(space, x.mat * x.mat)},
                                     {"yy", Op(space, y.mat * y.mat)}};
                std::function<TrajectoryRecord(std::uint64_t)> make;
                if (sc.traj_kind == TrajectoryKind::Jump) {
                    Op Z = sc.Z_expr.empty() ? Op(space, Matrix::Zero(sc.dim, sc.dim))
                                             : parse_or_config_error(sc.Z_expr, space, "Z");
                    if (sc.fock_n >= sc.dim)
                        throw ConfigError("$.initial_state.n: level exceeds truncation");
                    Vector psi0 = sc.coherent_alpha ? coherent_vector(space, *sc.coherent_alpha)
                                                    : Vector(Vector::Unit(sc.dim, sc.fock_n));
                    make = [=, &sc](std::uint64_t i) {
                        return jump_trajectory(c1, Z, H0, psi0, sc.t_final,
                                               derive_seed(sc.seed, i, 0), topts);
                    };
                } else if (sc.traj_kind == TrajectoryKind::Homodyne) {
                    Op Y = sc.Y_expr.empty() ? Op(space, Matrix::Zero(sc.dim, sc.dim))
                                             : parse_or_config_error(sc.Y_expr, space, "Y");
                    DensityMatrix rho0 = initial_state(sc, space);
                    make = [=, &sc](std::uint64_t i) {
                        return homodyne_trajectory(c1, Y, H0, sc.bath, rho0, sc.t_final,
                                                   derive_seed(sc.seed, i, 0), topts);
                    };
                } else {
                    Op X = sc.X_expr.empty() ? Op(space, Matrix::Zero(sc.dim, sc.dim))
                                             : parse_or_config_error(sc.X_expr, space, "X");
                    Op Y = sc.Y_expr.empty() ? Op(space, Matrix::Zero(sc.dim, sc.dim))
                                             : parse_or_config_error(sc.Y_expr, space, "Y");
                    DensityMatrix rho0 = initial_state(sc, space);
                    make = [=, &sc](std::uint64_t i) {
                        return heterodyne_trajectory(c1, X, Y, H0, sc.bath, rho0, sc.t_final,
                                                     derive_seed(sc.seed, i, 0), topts);
                    };
                }
                EnsembleStats stats = ensemble_average(make, sc.n_traj);
                std::vector<std::string> header{"time"};
                for (const auto& n : stats.observable_names) {
                    header.push_back(n + "_mean");
                    header.push_back(n + "_stderr");
                }
                CsvWriter csv(out_dir / "trajectories.csv", header);
                for (size_t t = 0; t < stats.times.size(); ++t) {
                    std::vector<double> row{stats.times[t]};
                    for (size_t k = 0; k < stats.mean.size(); ++k) {
                        row.push_back(stats.mean[k][t]);
                        row.push_back(stats.std_error[k][t]);
                    }
                    csv.row(row);
                }
                write_summary(out_dir, sc,
                              {{"n_traj", stats.n_traj}, {"base_seed", sc.seed}},
                              wall());
                return "trajectories: " + std::to_string(stats.n_traj) + " runs";
            }
            case RunMode::Spectrum: {
                LinearQuadratureModel model = build_linear_model(sc.lambda, sc.spec_mu, sc.tau);
                std::vector<double> omegas(sc.omega_count);
                double step = sc.omega_count > 1
                    ? (sc.omega_max - sc.omega_min) / (sc.omega_count - 1) : 0.0;
                for (int i = 0; i < sc.omega_count; ++i) omegas[i] = sc.omega_min + i * step;
                Spectrum spec = output_spectrum(model, omegas);
                CsvWriter csv(out_dir / "spectrum.csv", {"omega", "Sx", "Sy"});
                for (size_t i = 0; i < omegas.size(); ++i)
                    csv.row({spec.omegas[i], spec.Sx[i], spec.Sy[i]});
                auto [vx, vy] = steady_variance_analytic(sc.lambda, sc.spec_mu);
                write_summary(out_dir, sc,
                              {{"Vx_analytic", vx}, {"Vy_analytic", vy},
                               {"lambda", sc.lambda}, {"mu", sc.spec_mu}, {"tau", sc.tau}},
                              wall());
                return "spectrum: " + std::to_string(omegas.size()) + " points";
            }
            case RunMode::Compare: {
                // full two-mode quadrature model vs its fast-cavity reduction
                if (sc.scheme != SchemeKind::TwoModeQuadrature)
                    throw ConfigError("compare mode requires scheme type two-mode-quadrature");
                Op H0 = scenario_h0(sc, space);
                Op J = parse_or_config_error(sc.J_expr, space, "J");
                Liouvillian full = two_mode_feedback_liouvillian(
                    QuadratureCoupling{J}, sc.compare_gamma2, H0, sc.driven_dim);
                // reduced generator: Y = -2J/sqrt(gamma2)
                Op Y(space, -2.0 / std::sqrt(sc.compare_gamma2) * J.mat);
                Liouvillian reduced = quadrature_feedback_liouvillian(Y, H0, BathParams::vacuum());

                DensityMatrix src0 = initial_state(sc, space);
                DensityMatrix full0(full.space,
                                    Eigen::kroneckerProduct(src0.mat,
                                                            vacuum_state(make_space(sc.driven_dim)).mat));
                PropagateOptions opts;
                opts.dt = sc.dt;
                opts.output_stride = sc.stride;
                EvolutionResult full_res = propagate(full, full0, sc.t_final, opts);
                EvolutionResult red_res = propagate(reduced, src0, sc.t_final, opts);
                if (full_res.times.size() != red_res.times.size())
                    throw NumericalError("comparison grids do not match");
                CsvWriter csv(out_dir / "compare.csv", {"time", "trace_distance"});
                double max_dist = 0.0, sum_dist = 0.0;
                for (size_t i = 0; i < full_res.times.size(); ++i) {
                    DensityMatrix src = partial_trace(full_res.states[i], 1);
                    double d = trace_distance(src.mat, red_res.states[i].mat);
                    max_dist = std::max(max_dist, d);
                    sum_dist += d;
                    csv.row({full_res.times[i], d});
                }
                double mean_dist = sum_dist / double(full_res.times.size());
                bool pass = max_dist < sc.compare_threshold;
                write_summary(out_dir, sc,
                              {{"max_trace_distance", max_dist},
                               {"mean_trace_distance", mean_dist},
                               {"threshold", sc.compare_threshold},
                               {"pass", pass},
                               {"gamma2", sc.compare_gamma2}},
                              wall());
                if (!pass)
                    throw CompareFailure("max trace distance " + fmt_double(max_dist) +
                                         " exceeds threshold " + fmt_double(sc.compare_threshold));
                return "compare: max distance " + fmt_double(max_dist);
            }
            case RunMode::LindbladCheck: {
                Liouvillian L = build_generator(sc);
                LindbladCheckResult res = lindblad_form_check(L);
                write_summary(out_dir, sc,
                              {{"valid", res.valid},
                               {"min_kossakowski_eigenvalue", res.min_kossakowski_eigenvalue},
                               {"label", L.label}},
                              wall());
                return std::string("lindblad-check: ") + (res.valid ? "valid" : "invalid");
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const UnphysicalError&) {
        throw;
    } catch (const CompareFailure&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw UnphysicalError(e.what());
    } catch (const std::runtime_error& e) {
        throw NumericalError(e.what());
    }
    throw ConfigError("unhandled mode");
}

} // namespace optfb
