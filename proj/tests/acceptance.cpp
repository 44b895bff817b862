// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//
// Exit status is 0 when the set of failing criteria equals the set given with
// --known-failures (default: none), so an unexpected pass also fails.

#include "helpers.hpp"

#include "soaril/analysis.hpp"
#include "soaril/binarize.hpp"
#include "soaril/experiment.hpp"
#include "soaril/io.hpp"
#include "soaril/sampling.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace soaril;
using soaril::test::random_policy;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double sample_sd(const std::vector<double>& v) {
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
}

// Dominance counts from criteria 1 and 2 feed criterion 3.
std::int64_t g_dominance = 0;
std::int64_t g_dominance_runs = 0;

void note_dominance(const SeedResult& r) {
    g_dominance += dominance_violations(r.log);
    ++g_dominance_runs;
}

// ---------------------------------------------------------------------------

constexpr std::int64_t kHardK = 3000;
constexpr std::size_t kWindow = 100;
constexpr double kReach = 0.95;

struct Curve {
    std::int64_t first_reach = kHardK + 1;  // K + 1 when never reached
    double final_window = 0.0;
};

// Trailing-window mean of (Vmax - J_k) / (Vmax - J_E), the learner's exact
// return normalized so the expert scores 1 and the all-cost policy 0.
Curve hard_curve(const SeedResult& r) {
    const double vmax = r.mdp.value_bound(), je = r.regret.expert_return;
    Curve c;
    double sum = 0.0;
    const auto& recs = r.log.records;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        sum += (vmax - recs[i].learner_return) / (vmax - je);
        if (i >= kWindow) sum -= (vmax - recs[i - kWindow].learner_return) / (vmax - je);
        if (i + 1 < kWindow) continue;
        c.final_window = sum / kWindow;
        if (c.final_window >= kReach && c.first_reach > kHardK) c.first_reach = recs[i].k;
    }
    return c;
}

Outcome criterion1() {
    ExperimentConfig cfg;
    cfg.env_name = "hard_exploration";
    cfg.soar_K = kHardK;
    cfg.soar_eta = 4.0;
    cfg.soar_alpha = 0.5;
    cfg.soar_aggregation = Aggregation::mean_std;
    cfg.soar_std_scale = 0.001;
    cfg.soar_mode = ImitationMode::state_only;
    cfg.expert_size = 100;
    cfg.run_seed = 0;
    cfg.run_seeds = 5;

    std::map<std::int64_t, std::vector<Curve>> curves;
    for (std::int64_t L : {1, 2, 3, 5, 10}) {
        cfg.soar_L = L;
        for (const SeedResult& r : run_seeds(cfg)) {
            note_dominance(r);
            curves[L].push_back(hard_curve(r));
        }
    }
    auto reached_all = [&](std::int64_t L) {
        return std::all_of(curves[L].begin(), curves[L].end(), [](const Curve& c) { return c.first_reach <= kHardK; });
    };
    auto mean_reach = [&](std::int64_t L) {
        double s = 0.0;
        for (const Curve& c : curves[L]) s += static_cast<double>(c.first_reach);
        return s / curves[L].size();
    };
    auto final_sd = [&](std::int64_t L) {
        std::vector<double> v;
        for (const Curve& c : curves[L]) v.push_back(c.final_window);
        return sample_sd(v);
    };

    const bool a = !reached_all(1) || final_sd(1) >= 3.0 * final_sd(3);
    const bool b = reached_all(2) && reached_all(3);
    const bool c = mean_reach(5) > mean_reach(3) || mean_reach(10) > mean_reach(3);

    std::string detail = fmt("(a)%s (b)%s (c)%s;", a ? "ok" : "no", b ? "ok" : "no", c ? "ok" : "no");
    for (auto& [L, cs] : curves) {
        int reached = 0;
        for (const Curve& x : cs) reached += x.first_reach <= kHardK;
        detail += fmt(" L=%lld reach %d/5 mean_k %.0f sd %.4f;", static_cast<long long>(L), reached, mean_reach(L),
                      final_sd(L));
    }
    return {a && b && c, detail};
}

// ---------------------------------------------------------------------------

ExperimentConfig optimism_config() {
    ExperimentConfig cfg;
    cfg.env_name = "random";
    cfg.env_num_states = 8;
    cfg.env_num_actions = 3;
    cfg.env_branching = 2;
    cfg.env_discount = 0.9;
    cfg.soar_K = 500;
    cfg.soar_delta = 0.1;
    cfg.soar_aggregation = Aggregation::min;
    cfg.soar_mode = ImitationMode::state_action;
    cfg.expert_size = 1000;
    cfg.run_seed = 0;
    cfg.run_seeds = 20;
    return cfg;
}

SeedResult g_mixture_run;  // reused by criterion 9

Outcome criterion2() {
    ExperimentConfig cfg = optimism_config();
    const auto defaults = run_seeds(cfg);
    cfg.soar_L = 1;
    const auto single = run_seeds(cfg);

    double worst = 0.0;
    int over = 0;
    for (const SeedResult& r : defaults) {
        note_dominance(r);
        worst = std::max(worst, r.optimism.violation_fraction);
    }
    for (const SeedResult& r : single) {
        note_dominance(r);
        over += r.optimism.violation_fraction > 0.1;
    }
    g_mixture_run = defaults.front();
    const bool pass = worst <= 0.1 && over > 10;
    return {pass, fmt("default L=%lld max fraction %.4f; L=1 fraction > 0.1 on %d/20 seeds",
                      static_cast<long long>(defaults.front().log.config.num_batches), worst, over)};
}

Outcome criterion3() {
    return {g_dominance == 0 && g_dominance_runs > 0,
            fmt("%lld violations over %lld runs", static_cast<long long>(g_dominance),
                static_cast<long long>(g_dominance_runs))};
}

// ---------------------------------------------------------------------------

Outcome criterion4() {
    Rng rng(derive_seed(4, 0));
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::int64_t S = 2 + rng.index(7), A = 2 + rng.index(4);
        const TabularMdpd m = random_mdp(S, A, 1 + rng.index(S), 0.99 * rng.uniform(), rng);
        const Policyd pi = random_policy(S, A, rng), pi2 = random_policy(S, A, rng);
        Tabled qhat(S, A);
        for (Eigen::Index j = 0; j < qhat.size(); ++j) qhat.data()[j] = 20.0 * rng.uniform() - 10.0;
        worst = std::max(worst, extended_pdl_check(m, pi, pi2, qhat, m.cost).gap);
    }
    return {worst < 1e-10, fmt("max |lhs - rhs| %.3e over 100 instances", worst)};
}

// ---------------------------------------------------------------------------

std::vector<SeedResult> g_regret_runs;  // criteria 5 and 7

ExperimentConfig regret_config(std::int64_t K) {
    ExperimentConfig cfg;
    cfg.env_name = "random";
    cfg.env_num_states = 6;
    cfg.env_num_actions = 4;
    cfg.env_branching = 2;
    cfg.env_discount = 0.9;
    cfg.soar_K = K;
    cfg.soar_mode = ImitationMode::state_action;
    cfg.expert_size = 10000;
    cfg.run_seed = 0;
    cfg.run_seeds = 10;
    return cfg;
}

Outcome criterion5() {
    g_regret_runs = run_seeds(regret_config(5000));
    int sublinear = 0;
    std::vector<double> at500, at5000;
    std::string exps;
    for (const SeedResult& r : g_regret_runs) {
        const SublinearityFit fit = sublinearity_fit(r.regret.regret_total);
        sublinear += fit.exponent < 0.85;
        exps += fmt(" %.2f%s", fit.exponent, fit.shifted ? "*" : "");
        at500.push_back(r.regret.normalized[499]);
        at5000.push_back(r.regret.normalized[4999]);
    }
    const double m500 = mean(at500), m5000 = mean(at5000);
    return {sublinear >= 8 && m5000 < 0.5 * m500,
            fmt("exponent < 0.85 on %d/10 seeds (", sublinear) + exps.substr(1) +
                fmt("); mean Regret/K %.4f at 500, %.4f at 5000", m500, m5000)};
}

Outcome criterion6() {
    bool pass = true;
    std::string detail;
    for (std::int64_t K : {100, 1000, 10000}) {
        double worst = -std::numeric_limits<double>::infinity();
        for (const SeedResult& r : run_seeds(regret_config(K)))
            worst = std::max(worst, cost_ogd_term(r.log, r.mdp, r.dataset).back());
        const double bound = 2.0 * std::sqrt(static_cast<double>(K));
        pass = pass && worst <= bound;
        detail += fmt("K=%lld max %.2f (bound %.1f); ", static_cast<long long>(K), worst, bound);
    }
    detail.resize(detail.size() - 2);
    return {pass, detail};
}

Outcome criterion7() {
    std::int64_t violations = 0, checked = 0;
    for (const SeedResult& r : g_regret_runs) {
        violations += r.shift.violations;
        checked += static_cast<std::int64_t>(r.shift.distance.size());
    }
    return {violations == 0 && checked > 0,
            fmt("%lld violations over %lld consecutive pairs", static_cast<long long>(violations),
                static_cast<long long>(checked))};
}

// ---------------------------------------------------------------------------

Outcome criterion8() {
    Rng rng(derive_seed(8, 0));
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const std::int64_t S = i % 2 == 0 ? 4 : 8, A = 2 + rng.index(3);
        const TabularMdpd m = random_mdp(S, A, 1 + rng.index(S), 0.5 + 0.49 * rng.uniform(), rng);
        const BinarizedMdp<double> bin = binarize(m);
        const Policyd pi = random_policy(S, A, rng);
        const Vectord v = exact_value(m, pi, m.cost).v;
        worst = std::max(worst, (v - binarized_root_values(bin, pi)).cwiseAbs().maxCoeff());
    }
    bool horizon = true;
    for (std::int64_t S : {4, 8}) {
        for (double gamma : {0.5, 0.9, 0.99}) {
            const double g_bin = std::pow(gamma, 1.0 / binary_depth(S));
            const double lhs = 1.0 / (1.0 - g_bin), rhs = (std::log2(static_cast<double>(S)) + 2.0) / (1.0 - gamma);
            horizon = horizon && lhs <= rhs;
        }
    }
    return {worst <= 1e-8 && horizon,
            fmt("max value error %.3e over 50 MDPs; horizon bound %s", worst, horizon ? "holds" : "violated")};
}

Outcome criterion9() {
    Rng rng(derive_seed(9, 0));
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const TabularMdpd m = random_mdp(6, 3, 2, 0.9, rng);
        const Policyd pi = random_policy(6, 3, rng);
        const Tabled exact = exact_occupancy(m, pi).d;
        Tabled freq = Tabled::Zero(6, 3);
        const int n = 1000000;
        for (int j = 0; j < n; ++j) {
            const Trajectory t = sample_trajectory(m, pi, rng);
            freq(t.final_state, t.final_action) += 1.0;
        }
        worst = std::max(worst, (freq / n - exact).cwiseAbs().sum());
    }

    // Undiscounted cost sum along a geometric-horizon rollout is unbiased for
    // <nu0, V^pi>, so its mean over mixture episodes estimates the mixture return.
    const SeedResult& r = g_mixture_run;
    const int n = 200000;
    double s = 0.0, ss = 0.0;
    for (int j = 0; j < n; ++j) {
        const MixtureSample ms = mixture_rollout(r.log, r.mdp, rng);
        double g = r.mdp.cost(ms.trajectory.final_state, ms.trajectory.final_action);
        for (const Transition& tr : ms.trajectory.steps) g += r.mdp.cost(tr.state, tr.action);
        s += g;
        ss += g * g;
    }
    const double m = s / n, se = std::sqrt((ss / n - m * m) / (n - 1));
    const double z = std::abs(m - r.log.mixture_return) / se;
    return {worst < 0.01 && z <= 2.0,
            fmt("max occupancy L1 %.4f over 10 MDPs; mixture return %.4f vs exact %.4f (%.2f SE)", worst, m,
                r.log.mixture_return, z)};
}

Outcome criterion10() {
    ExperimentConfig cfg;
    cfg.env_name = "random";
    cfg.soar_K = 300;
    cfg.soar_aggregation = Aggregation::mean_std;
    cfg.soar_std_scale = 0.5;
    cfg.soar_std_clip = 2.0;
    cfg.run_seed = 11;
    cfg.run_seeds = 3;
    auto csvs = [&] {
        std::vector<std::string> out;
        for (const SeedResult& r : run_seeds(cfg)) {
            std::ostringstream ss;
            write_run_csv(ss, r.log, r.regret, r.optimism);
            out.push_back(ss.str());
        }
        return out;
    };
    const auto first = csvs(), second = csvs();
    cfg.env_name = "hard_exploration";
    cfg.soar_L = 3;
    const auto third = csvs(), fourth = csvs();
    const bool same = first == second && third == fourth && !first.front().empty();
    return {same, same ? "6 seed CSVs byte-identical on rerun" : "CSV output differs between identical runs"};
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_level(spdlog::level::err);
    std::set<int> expected;
    for (int i = 1; i < argc; ++i) {
        const char* prefix = "--known-failures=";
        if (std::strncmp(argv[i], prefix, std::strlen(prefix)) != 0) {
            std::fprintf(stderr, "usage: acceptance [--known-failures=1,2,...]\n");
            return 2;
        }
        std::stringstream list(argv[i] + std::strlen(prefix));
        for (std::string item; std::getline(list, item, ',');)
            if (!item.empty()) expected.insert(static_cast<int>(parse_int(item, "criterion")));
    }

    const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                            criterion5, criterion6, criterion7, criterion8,
                                                            criterion9, criterion10};
    std::set<int> failed;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const int id = static_cast<int>(i + 1);
        if (!o.pass) failed.insert(id);
        std::printf("criterion %2d: %s  [%.1fs] %s\n", id, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
        std::fflush(stdout);
    }
    if (failed != expected) {
        std::printf("failing set differs from --known-failures\n");
        return 1;
    }
    if (!failed.empty()) std::printf("only known failures present\n");
    return 0;
}
