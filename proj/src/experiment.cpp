#include "soaril/experiment.hpp"

#include "soaril/io.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <thread>

namespace soaril {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool is_auto(const std::string& v) { return v == "auto"; }

std::uint64_t parse_seed(const std::string& v, const std::string& key) {
    const std::int64_t x = parse_int(v, key);
    if (x < 0) throw UsageError(key + ": must be >= 0");
    return static_cast<std::uint64_t>(x);
}

template <class T>
std::string opt_text(const std::optional<T>& v) {
    if (!v) return "auto";
    if constexpr (std::is_floating_point_v<T>)
        return format_double(*v);
    else
        return std::to_string(*v);
}

struct Field {
    const char* key;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define SOARIL_DOUBLE(KEY, MEMBER)                                                                 \
    Field{KEY, [](ExperimentConfig& c, const std::string& v) { c.MEMBER = parse_double(v, KEY); }, \
          [](const ExperimentConfig& c) { return format_double(c.MEMBER); }}
#define SOARIL_INT(KEY, MEMBER)                                                                 \
    Field{KEY, [](ExperimentConfig& c, const std::string& v) { c.MEMBER = parse_int(v, KEY); }, \
          [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); }}
#define SOARIL_STRING(KEY, MEMBER)                                                  \
    Field{KEY, [](ExperimentConfig& c, const std::string& v) { c.MEMBER = v; }, \
          [](const ExperimentConfig& c) { return c.MEMBER; }}
#define SOARIL_OPT_DOUBLE(KEY, MEMBER)                                                        \
    Field{KEY,                                                                                \
          [](ExperimentConfig& c, const std::string& v) {                                     \
              c.MEMBER = is_auto(v) ? std::nullopt : std::optional<double>(parse_double(v, KEY)); \
          },                                                                                  \
          [](const ExperimentConfig& c) { return opt_text(c.MEMBER); }}
#define SOARIL_OPT_INT(KEY, MEMBER)                                                                 \
    Field{KEY,                                                                                      \
          [](ExperimentConfig& c, const std::string& v) {                                           \
              c.MEMBER = is_auto(v) ? std::nullopt : std::optional<std::int64_t>(parse_int(v, KEY)); \
          },                                                                                        \
          [](const ExperimentConfig& c) { return opt_text(c.MEMBER); }}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        SOARIL_STRING("env.name", env_name),
        SOARIL_OPT_DOUBLE("env.discount", env_discount),
        SOARIL_OPT_INT("env.num_states", env_num_states),
        SOARIL_OPT_INT("env.num_actions", env_num_actions),
        SOARIL_INT("env.branching", env_branching),
        SOARIL_DOUBLE("env.p_base", env_p_base),
        SOARIL_DOUBLE("env.p_gap", env_p_gap),
        SOARIL_DOUBLE("env.p_fall", env_p_fall),
        SOARIL_DOUBLE("env.cost_low", env_cost_low),
        SOARIL_DOUBLE("env.cost_high", env_cost_high),
        SOARIL_INT("env.length", env_length),
        SOARIL_DOUBLE("env.slip_prob", env_slip_prob),
        Field{"env.seed",
              [](ExperimentConfig& c, const std::string& v) {
                  c.env_seed = is_auto(v) ? std::nullopt : std::optional<std::uint64_t>(parse_seed(v, "env.seed"));
              },
              [](const ExperimentConfig& c) { return opt_text(c.env_seed); }},
        SOARIL_STRING("env.path", env_path),
        SOARIL_INT("soar.K", soar_K),
        SOARIL_OPT_INT("soar.L", soar_L),
        SOARIL_OPT_DOUBLE("soar.eta", soar_eta),
        SOARIL_OPT_DOUBLE("soar.alpha", soar_alpha),
        SOARIL_DOUBLE("soar.delta", soar_delta),
        Field{"soar.aggregation",
              [](ExperimentConfig& c, const std::string& v) { c.soar_aggregation = parse_aggregation(v); },
              [](const ExperimentConfig& c) { return std::string(to_string(c.soar_aggregation)); }},
        SOARIL_DOUBLE("soar.std_scale", soar_std_scale),
        SOARIL_DOUBLE("soar.std_clip", soar_std_clip),
        Field{"soar.mode", [](ExperimentConfig& c, const std::string& v) { c.soar_mode = parse_mode(v); },
              [](const ExperimentConfig& c) { return std::string(to_string(c.soar_mode)); }},
        SOARIL_INT("expert.size", expert_size),
        SOARIL_DOUBLE("expert.temperature", expert_temperature),
        SOARIL_STRING("expert.path", expert_path),
        Field{"run.seed", [](ExperimentConfig& c, const std::string& v) { c.run_seed = parse_seed(v, "run.seed"); },
              [](const ExperimentConfig& c) { return std::to_string(c.run_seed); }},
        SOARIL_INT("run.seeds", run_seeds),
        SOARIL_INT("run.threads", run_threads),
        SOARIL_STRING("output.dir", output_dir),
    };
    return table;
}

#undef SOARIL_DOUBLE
#undef SOARIL_INT
#undef SOARIL_STRING
#undef SOARIL_OPT_DOUBLE
#undef SOARIL_OPT_INT

double mean_of(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double stderr_of(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    const double m = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1)) / std::sqrt(static_cast<double>(x.size()));
}

std::ofstream open_file(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + p.string() + "'");
    return out;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    for (const Field& f : fields()) {
        if (key == f.key) {
            f.set(*this, value);
            return;
        }
    }
    throw UsageError("unknown config key '" + key + "'");
}

void ExperimentConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw UsageError("override '" + assignment + "': expected key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const Field& f : fields()) out.emplace_back(f.key, f.get(*this));
    return out;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& key, const std::string& why) { throw UsageError(key + ": " + why); };
    const bool hard = env_name == "hard_exploration", random = env_name == "random", chain = env_name == "chain",
               file = env_name == "file";
    if (!hard && !random && !chain && !file)
        fail("env.name", "unknown environment '" + env_name + "' (hard_exploration, random, chain, file)");
    if (file && env_path.empty()) fail("env.path", "required when env.name = file");
    if (env_num_states && !random) fail("env.num_states", "only used by env.name = random");
    if (env_num_actions && !(random || hard)) fail("env.num_actions", "not used by env.name = " + env_name);
    if (env_discount && file) fail("env.discount", "the MDP file carries its own discount");
    if (env_discount && !(*env_discount >= 0.0 && *env_discount < 1.0)) fail("env.discount", "must lie in [0, 1)");
    if (soar_K < 1) fail("soar.K", "must be >= 1");
    if (soar_L && *soar_L < 1) fail("soar.L", "must be >= 1");
    if (soar_eta && !(*soar_eta > 0.0)) fail("soar.eta", "must be > 0");
    if (soar_alpha && !(*soar_alpha > 0.0)) fail("soar.alpha", "must be > 0");
    if (!(soar_delta > 0.0 && soar_delta < 1.0)) fail("soar.delta", "must lie in (0, 1)");
    if (!(soar_std_scale >= 0.0) || !std::isfinite(soar_std_scale)) fail("soar.std_scale", "must be >= 0");
    if (!(soar_std_clip >= 0.0)) fail("soar.std_clip", "must be >= 0");
    if (expert_size < 1) fail("expert.size", "must be >= 1");
    if (!(expert_temperature >= 0.0)) fail("expert.temperature", "must be >= 0");
    if (run_seeds < 1) fail("run.seeds", "must be >= 1");
    if (run_threads < 0) fail("run.threads", "must be >= 0");
    if (output_dir.empty()) fail("output.dir", "must not be empty");
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config '" + path + "'");
    return parse(in);
}

TabularMdpd build_environment(const ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (cfg.env_name == "hard_exploration") {
        HardExplorationSpec spec;
        spec.num_actions = cfg.env_num_actions.value_or(spec.num_actions);
        spec.p_base = cfg.env_p_base;
        spec.p_gap = cfg.env_p_gap;
        spec.p_fall = cfg.env_p_fall;
        spec.cost_low = cfg.env_cost_low;
        spec.cost_high = cfg.env_cost_high;
        spec.discount = cfg.env_discount.value_or(spec.discount);
        return hard_exploration_mdp(spec);
    }
    if (cfg.env_name == "random") {
        Rng rng(cfg.env_seed.value_or(derive_seed(seed, 1)));
        return random_mdp(cfg.env_num_states.value_or(8), cfg.env_num_actions.value_or(3), cfg.env_branching,
                          cfg.env_discount.value_or(0.9), rng);
    }
    if (cfg.env_name == "chain") return chain_mdp(cfg.env_length, cfg.env_slip_prob, cfg.env_discount.value_or(0.9));
    return load_mdp(cfg.env_path);
}

SoarConfig resolve_soar(const ExperimentConfig& cfg, const TabularMdpd& mdp, std::uint64_t seed) {
    const Hyperparams hp =
        default_hyperparams(cfg.soar_K, mdp.num_states(), mdp.num_actions(), mdp.discount, cfg.soar_delta);
    SoarConfig sc;
    sc.iterations = cfg.soar_K;
    sc.num_batches = cfg.soar_L.value_or(hp.num_batches);
    sc.eta = cfg.soar_eta.value_or(hp.eta);
    sc.alpha = cfg.soar_alpha.value_or(hp.alpha);
    sc.delta = cfg.soar_delta;
    sc.aggregation = cfg.soar_aggregation;
    sc.std_scale = cfg.soar_std_scale;
    sc.std_clip = cfg.soar_std_clip;
    sc.mode = cfg.soar_mode;
    sc.seed = seed;
    return sc;
}

SeedResult run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
    SeedResult r;
    r.seed = seed;
    r.mdp = build_environment(cfg, seed);
    r.expert_policy = compute_expert_policy(r.mdp, cfg.expert_temperature);
    if (!cfg.expert_path.empty()) {
        r.dataset = load_dataset(cfg.expert_path);
        if (r.dataset.mode != cfg.soar_mode) throw UsageError("expert.path: dataset mode does not match soar.mode");
    } else {
        Rng data_rng(derive_seed(seed, 2));
        r.dataset = collect_expert_dataset(r.mdp, r.expert_policy, cfg.expert_size, cfg.soar_mode, data_rng);
    }
    const SoarConfig sc = resolve_soar(cfg, r.mdp, seed);
    spdlog::debug("seed {}: S={} A={} L={} eta={} alpha={}", seed, r.mdp.num_states(), r.mdp.num_actions(),
                  sc.num_batches, sc.eta, sc.alpha);
    Rng learner_rng(derive_seed(seed, 3));
    r.log = run_soar(r.mdp, r.dataset, sc, learner_rng);
    r.regret = compute_regret(r.log, r.mdp, r.expert_policy);
    r.optimism = optimism_audit(r.log, r.mdp);
    r.shift = occupancy_shift_audit(r.log, r.mdp);
    spdlog::info("seed {} done: mixture return {:.6g}, regret {:.6g}", seed, r.log.mixture_return,
                 r.regret.regret_total.back());
    return r;
}

std::vector<SeedResult> run_seeds(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(cfg.run_seeds);
    std::vector<SeedResult> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::size_t workers = cfg.run_threads > 0 ? static_cast<std::size_t>(cfg.run_threads)
                                               : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                results[i] = run_seed(cfg, cfg.run_seed + i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

RunSetSummary summarize(const std::string& label, const std::vector<SeedResult>& results) {
    std::vector<double> final_ret, mix, regret, frac;
    RunSetSummary s;
    s.label = label;
    for (const SeedResult& r : results) {
        final_ret.push_back(expected_return(r.mdp, r.log.final_policy, r.mdp.cost));
        mix.push_back(r.log.mixture_return);
        regret.push_back(r.regret.regret_total.back());
        frac.push_back(r.optimism.violation_fraction);
        s.dominance_violations += dominance_violations(r.log);
    }
    s.final_return_mean = mean_of(final_ret);
    s.final_return_stderr = stderr_of(final_ret);
    s.mixture_return_mean = mean_of(mix);
    s.mixture_return_stderr = stderr_of(mix);
    s.regret_mean = mean_of(regret);
    s.regret_stderr = stderr_of(regret);
    s.violation_fraction_mean = mean_of(frac);
    return s;
}

void write_run_outputs(const ExperimentConfig& cfg, const std::vector<SeedResult>& results, const std::string& dir,
                       double wall_seconds) {
    if (results.empty()) throw UsageError("write_run_outputs: no results");
    const std::filesystem::path root(dir);
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    if (ec) throw UsageError("cannot create output directory '" + dir + "': " + ec.message());

    for (const SeedResult& r : results) {
        auto out = open_file(root / ("seed_" + std::to_string(r.seed) + ".csv"));
        write_run_csv(out, r.log, r.regret, r.optimism);
    }

    {
        auto out = open_file(root / "aggregate.csv");
        out << "k,learner_return_mean,learner_return_stderr,regret_total_mean,regret_total_stderr\n";
        const std::size_t K = results.front().log.records.size();
        std::vector<double> ret(results.size()), reg(results.size());
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t j = 0; j < results.size(); ++j) {
                ret[j] = results[j].log.records[i].learner_return;
                reg[j] = results[j].regret.regret_total[i];
            }
            out << (i + 1) << ',' << format_double(mean_of(ret)) << ',' << format_double(stderr_of(ret)) << ','
                << format_double(mean_of(reg)) << ',' << format_double(stderr_of(reg)) << '\n';
        }
    }

    {
        auto out = open_file(root / "config.txt");
        for (const auto& [k, v] : cfg.entries()) out << k << " = " << v << '\n';
    }

    nlohmann::ordered_json j;
    nlohmann::ordered_json config;
    for (const auto& [k, v] : cfg.entries()) config[k] = v;
    j["config"] = config;
    j["seeds"] = nlohmann::ordered_json::array();
    for (const SeedResult& r : results) {
        const SoarConfig& sc = r.log.config;
        nlohmann::ordered_json s;
        s["seed"] = r.seed;
        s["num_states"] = r.mdp.num_states();
        s["num_actions"] = r.mdp.num_actions();
        s["discount"] = r.mdp.discount;
        s["L"] = sc.num_batches;
        s["eta"] = sc.eta;
        s["alpha"] = sc.alpha;
        s["expert_return"] = r.regret.expert_return;
        s["final_learner_return"] = expected_return(r.mdp, r.log.final_policy, r.mdp.cost);
        s["mixture_return"] = r.log.mixture_return;
        s["regret_total"] = r.regret.regret_total.back();
        s["regret_pi"] = r.regret.regret_pi.back();
        s["regret_c"] = r.regret.regret_c.back();
        s["regret_per_iteration"] = r.regret.normalized.back();
        if (r.regret.regret_total.size() >= 100) {
            const SublinearityFit fit = sublinearity_fit(r.regret.regret_total);
            s["regret_exponent"] = fit.exponent;
            s["regret_exponent_shifted"] = fit.shifted;
        } else {
            s["regret_exponent"] = nullptr;
        }
        s["optimism_violation_fraction"] = r.optimism.violation_fraction;
        s["on_policy_td_sum"] = r.optimism.on_policy_td_sum;
        s["max_td"] = r.optimism.max_td;
        s["dominance_violations"] = dominance_violations(r.log);
        s["occupancy_shift_violations"] = r.shift.violations;
        j["seeds"].push_back(s);
    }
    const RunSetSummary sum = summarize(dir, results);
    j["aggregate"] = {
        {"final_return_mean", sum.final_return_mean},
        {"final_return_stderr", sum.final_return_stderr},
        {"mixture_return_mean", sum.mixture_return_mean},
        {"mixture_return_stderr", sum.mixture_return_stderr},
        {"regret_total_mean", sum.regret_mean},
        {"regret_total_stderr", sum.regret_stderr},
        {"optimism_violation_fraction_mean", sum.violation_fraction_mean},
        {"dominance_violations", sum.dominance_violations},
    };
    j["wall_time_seconds"] = wall_seconds;
    auto out = open_file(root / "summary.json");
    out << j.dump(2) << '\n';
}

bool is_sweep_parameter(const std::string& name) {
    static const std::vector<std::string> names = {"L", "std_clip", "std_scale", "aggregation", "eta", "alpha"};
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<RunSetSummary> run_sweep(const ExperimentConfig& cfg, const std::string& param,
                                     const std::vector<std::string>& values, const std::string& dir) {
    if (!is_sweep_parameter(param))
        throw UsageError("sweep: unknown parameter '" + param + "' (L, std_clip, std_scale, aggregation, eta, alpha)");
    if (values.empty()) throw UsageError("sweep: no values given");
    std::vector<ExperimentConfig> configs;
    for (const std::string& v : values) {
        ExperimentConfig c = cfg;
        c.set("soar." + param, v);
        c.validate();
        configs.push_back(std::move(c));
    }

    std::vector<RunSetSummary> summaries;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::string label = param + "_" + values[i];
        spdlog::info("sweep {}", label);
        const auto t0 = std::chrono::steady_clock::now();
        const auto results = run_seeds(configs[i]);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_run_outputs(configs[i], results, (std::filesystem::path(dir) / label).string(), secs);
        summaries.push_back(summarize(label, results));
    }

    auto out = open_file(std::filesystem::path(dir) / "sweep.csv");
    out << "parameter,value,seeds,final_return_mean,final_return_stderr,mixture_return_mean,mixture_return_stderr,"
           "regret_total_mean,regret_total_stderr,optimism_violation_fraction_mean,dominance_violations\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        const RunSetSummary& s = summaries[i];
        out << param << ',' << values[i] << ',' << cfg.run_seeds << ',' << format_double(s.final_return_mean) << ','
            << format_double(s.final_return_stderr) << ',' << format_double(s.mixture_return_mean) << ','
            << format_double(s.mixture_return_stderr) << ',' << format_double(s.regret_mean) << ','
            << format_double(s.regret_stderr) << ',' << format_double(s.violation_fraction_mean) << ','
            << s.dominance_violations << '\n';
    }
    return summaries;
}

}  // namespace soaril
