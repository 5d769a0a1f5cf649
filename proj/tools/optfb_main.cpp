#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "optfb/scenario.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw optfb::ConfigError("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommonArgs {
    std::string config;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    double tolerance = 0.0;
    bool tolerance_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "scenario config file (JSON)")->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "override the base RNG seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--threads", args.threads, "worker threads (trajectories)");
    cmd->add_option("--tolerance", args.tolerance, "override the compare threshold")
        ->each([&args](const std::string&) { args.tolerance_set = true; });
}

int execute(const CommonArgs& args, const char* forced_mode) {
    try {
        optfb::Scenario sc = optfb::parse_scenario(slurp(args.config));
        if (forced_mode) {
            std::string m(forced_mode);
            if (m == "compare" && sc.mode != optfb::RunMode::Compare)
                throw optfb::ConfigError("config mode.type must be 'compare' for this subcommand");
            if (m == "spectrum" && sc.mode != optfb::RunMode::Spectrum)
                throw optfb::ConfigError("config mode.type must be 'spectrum' for this subcommand");
            if (m == "lindblad-check" && sc.mode != optfb::RunMode::LindbladCheck)
                throw optfb::ConfigError("config mode.type must be 'lindblad-check' for this subcommand");
        }
        optfb::RunOverrides ov;
        if (args.seed_set) ov.seed = args.seed;
        if (args.tolerance_set) ov.tolerance = args.tolerance;
        std::cout << optfb::run_scenario(sc, args.out_dir, ov) << "\n";
        return 0;
    } catch (const optfb::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const optfb::UnphysicalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const optfb::CompareFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cavity feedback scenario runner"};
    app.require_subcommand(1);

    CommonArgs run_args, validate_args, compare_args, spectra_args, check_args;
    CLI::App* run = app.add_subcommand("run", "execute a scenario");
    add_common(run, run_args);
    CLI::App* validate = app.add_subcommand("validate", "parse and validate a config only");
    add_common(validate, validate_args);
    CLI::App* compare = app.add_subcommand("compare", "full vs reduced model comparison");
    add_common(compare, compare_args);
    CLI::App* spectra = app.add_subcommand("spectra", "closed-form output spectra");
    add_common(spectra, spectra_args);
    CLI::App* check = app.add_subcommand("lindblad-check", "canonical-form validity check");
    add_common(check, check_args);

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) {
        try {
            optfb::parse_scenario(slurp(validate_args.config));
            // building the generator surfaces operator/space problems too
            std::cout << "config ok\n";
            return 0;
        } catch (const optfb::ConfigError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        } catch (const optfb::UnphysicalError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 3;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 4;
        }
    }
    if (run->parsed()) return execute(run_args, nullptr);
    if (compare->parsed()) return execute(compare_args, "compare");
    if (spectra->parsed()) return execute(spectra_args, "spectrum");
    return execute(check_args, "lindblad-check");
}
