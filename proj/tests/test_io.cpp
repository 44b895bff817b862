#include "helpers.hpp"

#include "soaril/experiment.hpp"
#include "soaril/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace soaril;
using namespace soaril::test;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("soaril_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig chain_config() {
    ExperimentConfig cfg;
    cfg.env_name = "chain";
    cfg.env_length = 4;
    cfg.soar_K = 10;
    cfg.expert_size = 50;
    return cfg;
}

}  // namespace

TEST_SUITE("cli_harness") {

TEST_CASE("format_double round-trips") {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double x = std::ldexp(2.0 * rng.uniform() - 1.0, static_cast<int>(rng.index(200)) - 100);
        CHECK(parse_double(format_double(x), "x") == x);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(std::isinf(parse_double("inf", "x")));
    CHECK_THROWS_AS(parse_double("1.5x", "x"), UsageError);
    CHECK_THROWS_AS(parse_int("2.5", "n"), UsageError);
    CHECK(parse_int("-7", "n") == -7);
}

TEST_CASE("MDP text round trip is exact") {
    Rng rng(2);
    const TabularMdpd m = random_mdp(5, 3, 2, 0.93, rng);
    std::stringstream ss;
    write_mdp(ss, m);
    const TabularMdpd back = read_mdp(ss);
    CHECK(back.discount == m.discount);
    CHECK(back.init == m.init);
    CHECK(back.cost == m.cost);
    CHECK(back.transitions == m.transitions);
}

TEST_CASE("malformed MDP input is rejected") {
    const auto bad = [](const std::string& text) {
        std::istringstream in(text);
        CHECK_THROWS_AS(read_mdp(in), UsageError);
    };
    bad("");
    bad("num_states 1\nnum_actions 1\ndiscount 0.5\ninit 1\ncost\n0.5\n");
    bad("num_states 1\nnum_actions 1\ndiscount 0.5\ninit 1\ncost\n0.5\ntransitions\n0.9\n");
    bad("num_states 1\nnum_actions 1\ndiscount 1.5\ninit 1\ncost\n0.5\ntransitions\n1\n");
    bad("num_states 1\nnum_actions 1\ndiscount 0.5\ninit 1 0\ncost\n0.5\ntransitions\n1\n");
    bad("num_states x\n");

    std::istringstream ok("# one state\nnum_states 1\nnum_actions 1\ndiscount 0.5\ninit 1\ncost\n0.5\ntransitions\n1\n");
    CHECK(read_mdp(ok).cost(0, 0) == 0.5);
}

TEST_CASE("dataset round trip and errors") {
    ExpertDataset d;
    d.mode = ImitationMode::state_action;
    d.num_states = 3;
    d.num_actions = 2;
    d.states = {0, 2, 1};
    d.actions = {1, 0, 1};
    std::stringstream ss;
    write_dataset(ss, d);
    const ExpertDataset back = read_dataset(ss);
    CHECK(back.mode == d.mode);
    CHECK(back.states == d.states);
    CHECK(back.actions == d.actions);

    const auto bad = [](const std::string& text) {
        std::istringstream in(text);
        CHECK_THROWS_AS(read_dataset(in), UsageError);
    };
    bad("mode=state_only num_states=2\n0\n");
    bad("mode=state_only num_states=2 num_actions=1\n2\n");
    bad("mode=state_only num_states=2 num_actions=1\n0,0\n");
    bad("mode=state_action num_states=2 num_actions=1\n0\n");
    bad("mode=other num_states=2 num_actions=1\n0\n");
    bad("mode=state_only num_states=2 num_actions=1\n");
}

TEST_CASE("config parsing, overrides and errors") {
    std::istringstream in("# comment\nenv.name = random\nsoar.K = 20  # trailing\nsoar.L = auto\nsoar.aggregation = mean_std\n");
    ExperimentConfig cfg = ExperimentConfig::parse(in);
    CHECK(cfg.env_name == "random");
    CHECK(cfg.soar_K == 20);
    CHECK_FALSE(cfg.soar_L.has_value());
    CHECK(cfg.soar_aggregation == Aggregation::mean_std);

    cfg.apply_override("soar.L=4");
    CHECK(cfg.soar_L == 4);
    cfg.apply_override("soar.std_clip=0.5");
    CHECK(cfg.soar_std_clip == 0.5);

    CHECK_THROWS_AS(cfg.apply_override("soar.nope=1"), UsageError);
    CHECK_THROWS_AS(cfg.apply_override("soar.K"), UsageError);
    CHECK_THROWS_AS(cfg.set("soar.K", "ten"), UsageError);
    std::istringstream broken("soar.K 10\n");
    CHECK_THROWS_AS(ExperimentConfig::parse(broken), UsageError);

    ExperimentConfig invalid;
    invalid.soar_K = 0;
    try {
        invalid.validate();
        FAIL("validate accepted K = 0");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("soar.K") != std::string::npos);
    }

    // entries() feeds back through set() unchanged.
    ExperimentConfig copy;
    for (const auto& [k, v] : cfg.entries()) copy.set(k, v);
    CHECK(copy.entries() == cfg.entries());
}

TEST_CASE("unset hyperparameters resolve to the defaults") {
    ExperimentConfig cfg;
    cfg.soar_K = 400;
    const TabularMdpd m = build_environment(cfg, 0);
    const SoarConfig soar = resolve_soar(cfg, m, 0);
    const Hyperparams def = default_hyperparams(400, m.num_states(), m.num_actions(), m.discount, 0.1);
    CHECK(soar.num_batches == def.num_batches);
    CHECK(soar.eta == def.eta);
    CHECK(soar.alpha == def.alpha);
}

TEST_CASE("random environments follow env.seed") {
    ExperimentConfig cfg;
    cfg.env_name = "random";
    const TabularMdpd a = build_environment(cfg, 0), b = build_environment(cfg, 1);
    CHECK(a.transitions != b.transitions);
    cfg.env_seed = 5;
    CHECK(build_environment(cfg, 0).transitions == build_environment(cfg, 1).transitions);
}

TEST_CASE("a chain run with K = 10 writes 10 rows per seed") {
    ExperimentConfig cfg = chain_config();
    cfg.run_seeds = 2;
    const auto results = run_seeds(cfg);
    REQUIRE(results.size() == 2);
    const fs::path dir = scratch_dir("chain");
    write_run_outputs(cfg, results, dir.string(), 0.0);
    for (const char* name : {"seed_0.csv", "seed_1.csv", "aggregate.csv", "config.txt", "summary.json"})
        CHECK(fs::exists(dir / name));
    std::istringstream csv(slurp(dir / "seed_0.csv"));
    std::string line;
    int rows = -1;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == 10);
    fs::remove_all(dir);
}

TEST_CASE("run_seeds is deterministic and independent of thread count") {
    ExperimentConfig cfg = chain_config();
    cfg.run_seeds = 3;
    cfg.run_threads = 1;
    const auto serial = run_seeds(cfg);
    cfg.run_threads = 3;
    const auto parallel = run_seeds(cfg);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        std::ostringstream a, b;
        write_run_csv(a, serial[i].log, serial[i].regret, serial[i].optimism);
        write_run_csv(b, parallel[i].log, parallel[i].regret, parallel[i].optimism);
        CHECK(a.str() == b.str());
    }
}

TEST_CASE("a single-value sweep reproduces the plain run") {
    ExperimentConfig cfg = chain_config();
    cfg.soar_L = 2;
    const auto results = run_seeds(cfg);
    const fs::path dir = scratch_dir("sweep");
    const auto summaries = run_sweep(cfg, "L", {"2"}, dir.string());
    REQUIRE(summaries.size() == 1);
    std::ostringstream expected;
    write_run_csv(expected, results[0].log, results[0].regret, results[0].optimism);
    CHECK(slurp(dir / "L_2" / "seed_0.csv") == expected.str());
    CHECK(fs::exists(dir / "sweep.csv"));
    CHECK_FALSE(is_sweep_parameter("K"));
    CHECK_THROWS_AS(run_sweep(cfg, "K", {"2"}, dir.string()), UsageError);
    fs::remove_all(dir);
}

TEST_CASE("aggregation sweep shows no dominance violations") {
    ExperimentConfig cfg;
    cfg.env_name = "random";
    cfg.soar_K = 200;
    cfg.soar_L = 3;
    cfg.run_seeds = 2;
    cfg.expert_size = 200;
    const fs::path dir = scratch_dir("aggregation");
    const auto summaries = run_sweep(cfg, "aggregation", {"min", "mean_std"}, dir.string());
    REQUIRE(summaries.size() == 2);
    for (const auto& s : summaries) CHECK(s.dominance_violations == 0);
    fs::remove_all(dir);
}

}
