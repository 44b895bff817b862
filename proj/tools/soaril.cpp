// soaril: command-line front end for runs, sweeps, verification and
// environment inspection.

#include "soaril/experiment.hpp"
#include "soaril/io.hpp"
#include "soaril/verify.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
    std::string config;
    std::optional<std::int64_t> seed;
    std::optional<std::int64_t> seeds;
    std::string out;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "Config file (key = value lines)");
    cmd->add_option("--seed", f.seed, "First run seed (run.seed)");
    cmd->add_option("--seeds", f.seeds, "Number of seeds (run.seeds)");
    cmd->add_option("--out", f.out, "Output directory (output.dir)");
    cmd->add_option("--set", f.sets, "Override a config key, key=value (repeatable)");
}

soaril::ExperimentConfig resolve_config(const CommonFlags& f) {
    soaril::ExperimentConfig cfg = f.config.empty() ? soaril::ExperimentConfig{} : soaril::ExperimentConfig::load(f.config);
    if (f.seed) cfg.set("run.seed", std::to_string(*f.seed));
    if (f.seeds) cfg.set("run.seeds", std::to_string(*f.seeds));
    if (!f.out.empty()) cfg.set("output.dir", f.out);
    for (const auto& s : f.sets) cfg.apply_override(s);
    cfg.validate();
    return cfg;
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("soaril");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("SOAR_LOG_LEVEL");
    const std::string level = env ? env : "error";
    if (level == "error")
        spdlog::set_level(spdlog::level::err);
    else if (level == "info")
        spdlog::set_level(spdlog::level::info);
    else if (level == "debug")
        spdlog::set_level(spdlog::level::debug);
    else
        throw soaril::UsageError("SOAR_LOG_LEVEL must be error, info or debug, got '" + level + "'");
}

int cmd_run(const CommonFlags& f) {
    const soaril::ExperimentConfig cfg = resolve_config(f);
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = soaril::run_seeds(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    soaril::write_run_outputs(cfg, results, cfg.output_dir, secs);
    const soaril::RunSetSummary s = soaril::summarize(cfg.output_dir, results);
    std::cout << "seeds " << results.size() << "  mixture return " << soaril::format_double(s.mixture_return_mean)
              << "  regret " << soaril::format_double(s.regret_mean) << "  -> " << cfg.output_dir << '\n';
    return 0;
}

int cmd_sweep(const CommonFlags& f, const std::string& param, const std::vector<std::string>& values) {
    const soaril::ExperimentConfig cfg = resolve_config(f);
    const auto summaries = soaril::run_sweep(cfg, param, values, cfg.output_dir);
    for (const auto& s : summaries)
        std::cout << s.label << "  final return " << soaril::format_double(s.final_return_mean) << " +- "
                  << soaril::format_double(s.final_return_stderr) << "  regret " << soaril::format_double(s.regret_mean)
                  << '\n';
    return 0;
}

int cmd_verify(const std::string& scope) {
    const auto results = soaril::run_verification(scope);
    soaril::print_check_table(std::cout, results);
    return soaril::all_passed(results) ? 0 : kExitFailure;
}

int cmd_env_info(const CommonFlags& f, const std::string& mdp_path, const std::string& dataset_path) {
    const soaril::ExperimentConfig cfg = resolve_config(f);
    const std::uint64_t seed = cfg.run_seed;
    const soaril::TabularMdpd mdp = soaril::build_environment(cfg, seed);
    const soaril::Policyd expert = soaril::compute_expert_policy(mdp, cfg.expert_temperature);
    const soaril::Policyd uniform = soaril::Policyd::uniform(mdp.num_states(), mdp.num_actions());
    const soaril::SoarConfig sc = soaril::resolve_soar(cfg, mdp, seed);

    std::cout << "env             " << cfg.env_name << '\n'
              << "states          " << mdp.num_states() << '\n'
              << "actions         " << mdp.num_actions() << '\n'
              << "discount        " << soaril::format_double(mdp.discount) << '\n'
              << "value_bound     " << soaril::format_double(mdp.value_bound()) << '\n'
              << "expert_return   " << soaril::format_double(soaril::expected_return(mdp, expert, mdp.cost)) << '\n'
              << "uniform_return  " << soaril::format_double(soaril::expected_return(mdp, uniform, mdp.cost)) << '\n'
              << "L               " << sc.num_batches << '\n'
              << "eta             " << soaril::format_double(sc.eta) << '\n'
              << "alpha           " << soaril::format_double(sc.alpha) << '\n';
    if (!mdp_path.empty()) soaril::save_mdp(mdp_path, mdp);
    if (!dataset_path.empty()) {
        soaril::Rng rng(soaril::derive_seed(seed, 2));
        soaril::save_dataset(dataset_path,
                             soaril::collect_expert_dataset(mdp, expert, cfg.expert_size, cfg.soar_mode, rng));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular SOAR-IL laboratory"};
    app.require_subcommand(1);

    CommonFlags run_flags, sweep_flags, env_flags;
    auto* run = app.add_subcommand("run", "Run every seed of a config and write CSV/JSON outputs");
    add_common(run, run_flags);

    auto* sweep = app.add_subcommand("sweep", "One run-set per value of a parameter");
    add_common(sweep, sweep_flags);
    std::string param;
    std::vector<std::string> values;
    sweep->add_option("--param", param, "L, std_clip, std_scale, aggregation, eta or alpha")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');

    auto* verify = app.add_subcommand("verify", "Run invariant suites and print a pass/fail table");
    std::string scope = "all";
    verify->add_option("--scope", scope, "all, pdl, samuelson, optimism, occupancy or regret");

    auto* env_info = app.add_subcommand("env-info", "Describe the configured environment");
    add_common(env_info, env_flags);
    std::string mdp_path, dataset_path;
    env_info->add_option("--write-mdp", mdp_path, "Save the MDP in the text format");
    env_info->add_option("--write-dataset", dataset_path, "Save an expert dataset for run.seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        setup_logging();
        if (*run) return cmd_run(run_flags);
        if (*sweep) return cmd_sweep(sweep_flags, param, values);
        if (*verify) return cmd_verify(scope);
        return cmd_env_info(env_flags, mdp_path, dataset_path);
    } catch (const soaril::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitFailure;
    }
}
