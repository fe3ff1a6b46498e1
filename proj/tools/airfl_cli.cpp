#include "airfl/harness.hpp"
#include "airfl/kernels.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kAborted = 2;

int report_config_error(const airfl::harness::ConfigError& e) {
    std::cerr << "configuration is invalid:\n";
    for (const auto& msg : e.errors())
        std::cerr << "  " << msg << '\n';
    return kInvalid;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Over-the-air federated learning simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::size_t reps = 0;

    auto* run = app.add_subcommand("run", "Run every configured scheme and write records");
    run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    auto* out_opt = run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    auto* seed_opt = run->add_option("--seed", seed, "Base seed (overrides seed)");
    auto* reps_opt = run->add_option("--reps", reps, "Repetitions (overrides repetitions)")->check(CLI::PositiveNumber);

    auto* validate = app.add_subcommand("validate", "Check a config and print its resolved form");
    validate->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

    auto* bound = app.add_subcommand("bound", "Evaluate convergence bounds from a finished run");
    bound->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    auto* bound_out = bound->add_option("--out", out_dir, "Directory holding records.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInvalid;
    }

    airfl::harness::ExperimentConfig cfg;
    try {
        cfg = airfl::harness::load_config(config_path);
    } catch (const airfl::harness::ConfigError& e) {
        return report_config_error(e);
    }
    if (!out_dir.empty() && (*out_opt || *bound_out))
        cfg.output_dir = out_dir;

    if (*validate) {
        std::cout << airfl::harness::dump_config(cfg);
        return kOk;
    }

    if (*run) {
        if (*seed_opt)
            cfg.seed = seed;
        if (*reps_opt)
            cfg.repetitions = reps;
        std::cerr << "kernels: " << airfl::kernels::backend_name(airfl::kernels::active_backend()) << '\n';
        try {
            const auto result = airfl::harness::run_experiment(cfg, &std::cerr);
            std::cerr << "wrote " << result.records.size() << " records to " << cfg.output_dir.string() << '\n';
            return result.exit_code();
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kAborted;
        }
    }

    try {
        const auto report = airfl::harness::evaluate_bound(cfg);
        std::cout << "kind: " << report.kind << "\nscheme: " << report.scheme << '\n';
        for (std::size_t r = 0; r < report.per_repetition.size(); ++r)
            std::cout << "repetition " << r << ": " << report.per_repetition[r] << '\n';
        std::cout << "mean: " << report.mean << '\n';
        return kOk;
    } catch (const airfl::harness::ConfigError& e) {
        return report_config_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kAborted;
    }
}
