#pragma once

#include "soaril/analysis.hpp"
#include "soaril/envs.hpp"
#include "soaril/expert.hpp"
#include "soaril/soar.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace soaril {

/// Flat experiment description. Keys are dotted (env.*, soar.*, expert.*,
/// run.*, output.*); optional fields left unset fall back to the environment
/// default or to default_hyperparams.
struct ExperimentConfig {
    // env.name: hard_exploration, random, chain or file (env.path)
    std::string env_name = "hard_exploration";
    std::optional<double> env_discount;
    std::optional<std::int64_t> env_num_states;   // random
    std::optional<std::int64_t> env_num_actions;  // hard_exploration, random
    std::int64_t env_branching = 2;
    double env_p_base = 0.1;
    double env_p_gap = 0.1;
    double env_p_fall = 0.1;
    double env_cost_low = 1.0;
    double env_cost_high = 0.0;
    std::int64_t env_length = 10;
    double env_slip_prob = 0.1;
    std::optional<std::uint64_t> env_seed;  // unset: one MDP per run seed
    std::string env_path;

    std::int64_t soar_K = 1000;
    std::optional<std::int64_t> soar_L;
    std::optional<double> soar_eta;
    std::optional<double> soar_alpha;
    double soar_delta = 0.1;
    Aggregation soar_aggregation = Aggregation::min;
    double soar_std_scale = 1.0;
    double soar_std_clip = std::numeric_limits<double>::infinity();
    ImitationMode soar_mode = ImitationMode::state_only;

    std::int64_t expert_size = 1000;
    double expert_temperature = 0.0;
    std::string expert_path;

    std::uint64_t run_seed = 0;
    std::int64_t run_seeds = 1;
    std::int64_t run_threads = 0;  // 0: hardware concurrency

    std::string output_dir = "out";

    /// Sets one key from its text form; UsageError names the key.
    void set(const std::string& key, const std::string& value);
    /// Applies a "key=value" override.
    void apply_override(const std::string& assignment);
    /// Every key with its current text value ("auto" when unset).
    std::vector<std::pair<std::string, std::string>> entries() const;
    void validate() const;

    /// Reads "key = value" lines; '#' starts a comment.
    static ExperimentConfig parse(std::istream& in);
    static ExperimentConfig load(const std::string& path);
};

/// Environment for a run seed. Random MDPs use env.seed when set, otherwise a
/// stream derived from the run seed.
TabularMdpd build_environment(const ExperimentConfig& cfg, std::uint64_t seed);

/// SoarConfig with unset L, eta and alpha filled from default_hyperparams.
SoarConfig resolve_soar(const ExperimentConfig& cfg, const TabularMdpd& mdp, std::uint64_t seed);

struct SeedResult {
    std::uint64_t seed = 0;
    TabularMdpd mdp;
    Policyd expert_policy;
    ExpertDataset dataset;
    RunLog log;
    RegretReport regret;
    OptimismAudit optimism;
    ShiftAudit shift;
};

/// Environment, expert, dataset and learner for one seed, plus the oracle
/// reports written to the per-seed CSV.
SeedResult run_seed(const ExperimentConfig& cfg, std::uint64_t seed);

/// Seeds run.seed .. run.seed + run.seeds - 1, executed concurrently; the
/// result order follows the seeds.
std::vector<SeedResult> run_seeds(const ExperimentConfig& cfg);

/// Writes seed_<n>.csv, aggregate.csv, config.txt and summary.json into dir.
void write_run_outputs(const ExperimentConfig& cfg, const std::vector<SeedResult>& results, const std::string& dir,
                       double wall_seconds);

/// Mean and standard error over seeds of the final-iteration quantities.
struct RunSetSummary {
    std::string label;
    double final_return_mean = 0.0, final_return_stderr = 0.0;
    double mixture_return_mean = 0.0, mixture_return_stderr = 0.0;
    double regret_mean = 0.0, regret_stderr = 0.0;
    double violation_fraction_mean = 0.0;
    std::int64_t dominance_violations = 0;
};

RunSetSummary summarize(const std::string& label, const std::vector<SeedResult>& results);

/// Sweepable parameters: L, std_clip, std_scale, aggregation, eta, alpha.
bool is_sweep_parameter(const std::string& name);

/// One run-set per value, written to dir/<param>_<value>/, plus dir/sweep.csv.
std::vector<RunSetSummary> run_sweep(const ExperimentConfig& cfg, const std::string& param,
                                     const std::vector<std::string>& values, const std::string& dir);

}  // namespace soaril
