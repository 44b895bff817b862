#include "soaril/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

namespace soaril {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
    double x = 0.0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, x);
    if (text.empty() || res.ec != std::errc() || res.ptr != end)
        throw UsageError(std::string(what) + ": expected a number, got '" + std::string(text) + "'");
    return x;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
    std::int64_t x = 0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, x);
    if (text.empty() || res.ec != std::errc() || res.ptr != end)
        throw UsageError(std::string(what) + ": expected an integer, got '" + std::string(text) + "'");
    return x;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

/// Next non-empty, non-comment line split into tokens; empty at end of input.
std::vector<std::string> next_tokens(std::istream& in, int& line_no) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto toks = split_ws(line);
        if (!toks.empty()) return toks;
    }
    return {};
}

std::string at_line(int line_no) { return "mdp line " + std::to_string(line_no); }

void write_row(std::ostream& out, const auto& row) {
    for (Eigen::Index j = 0; j < row.size(); ++j) out << (j ? " " : "") << format_double(row(j));
    out << '\n';
}

void read_rows(std::istream& in, int& line_no, Tabled& dst) {
    for (Eigen::Index i = 0; i < dst.rows(); ++i) {
        const auto toks = next_tokens(in, line_no);
        if (static_cast<Eigen::Index>(toks.size()) != dst.cols())
            throw UsageError(at_line(line_no) + ": expected " + std::to_string(dst.cols()) + " numbers");
        for (Eigen::Index j = 0; j < dst.cols(); ++j) dst(i, j) = parse_double(toks[static_cast<std::size_t>(j)], at_line(line_no));
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path + "'");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    return in;
}

}  // namespace

void write_mdp(std::ostream& out, const TabularMdpd& mdp) {
    out << "num_states " << mdp.num_states() << '\n';
    out << "num_actions " << mdp.num_actions() << '\n';
    out << "discount " << format_double(mdp.discount) << '\n';
    out << "init";
    for (Eigen::Index s = 0; s < mdp.init.size(); ++s) out << ' ' << format_double(mdp.init(s));
    out << "\ncost\n";
    for (Eigen::Index s = 0; s < mdp.cost.rows(); ++s) write_row(out, mdp.cost.row(s));
    out << "transitions\n";
    for (Eigen::Index r = 0; r < mdp.transitions.rows(); ++r) write_row(out, mdp.transitions.row(r));
}

TabularMdpd read_mdp(std::istream& in) {
    int line_no = 0;
    std::int64_t S = -1, A = -1;
    double discount = -1.0;
    bool have_discount = false;
    std::vector<std::string> init_toks;
    TabularMdpd mdp;
    bool have_cost = false, have_transitions = false;

    for (auto toks = next_tokens(in, line_no); !toks.empty(); toks = next_tokens(in, line_no)) {
        const std::string& key = toks[0];
        auto need_dims = [&] {
            if (S < 1 || A < 1) throw UsageError(at_line(line_no) + ": '" + key + "' before num_states/num_actions");
        };
        if (key == "num_states" || key == "num_actions" || key == "discount") {
            if (toks.size() != 2) throw UsageError(at_line(line_no) + ": '" + key + "' takes one value");
            if (key == "discount") {
                discount = parse_double(toks[1], at_line(line_no));
                have_discount = true;
            } else {
                const std::int64_t v = parse_int(toks[1], at_line(line_no));
                if (v < 1) throw UsageError(at_line(line_no) + ": '" + key + "' must be positive");
                (key == "num_states" ? S : A) = v;
            }
        } else if (key == "init") {
            init_toks.assign(toks.begin() + 1, toks.end());
        } else if (key == "cost") {
            need_dims();
            mdp.cost = Tabled(S, A);
            read_rows(in, line_no, mdp.cost);
            have_cost = true;
        } else if (key == "transitions") {
            need_dims();
            mdp.transitions = Tabled(S * A, S);
            read_rows(in, line_no, mdp.transitions);
            have_transitions = true;
        } else {
            throw UsageError(at_line(line_no) + ": unknown key '" + key + "'");
        }
    }
    if (S < 1 || A < 1) throw UsageError("mdp: num_states and num_actions are required");
    if (!have_discount) throw UsageError("mdp: discount is required");
    if (!have_cost || !have_transitions) throw UsageError("mdp: cost and transitions blocks are required");
    if (static_cast<std::int64_t>(init_toks.size()) != S) throw UsageError("mdp: init needs num_states values");
    mdp.init = Vectord(S);
    for (std::int64_t s = 0; s < S; ++s) mdp.init(s) = parse_double(init_toks[static_cast<std::size_t>(s)], "mdp init");
    mdp.discount = discount;
    if (const auto v = validate_mdp(mdp); !v.empty()) throw UsageError("mdp: " + describe(v.front()));
    return mdp;
}

void save_mdp(const std::string& path, const TabularMdpd& mdp) {
    auto out = open_out(path);
    write_mdp(out, mdp);
}

TabularMdpd load_mdp(const std::string& path) {
    auto in = open_in(path);
    return read_mdp(in);
}

void write_dataset(std::ostream& out, const ExpertDataset& data) {
    out << "mode=" << to_string(data.mode) << " num_states=" << data.num_states << " num_actions=" << data.num_actions
        << '\n';
    for (std::size_t i = 0; i < data.states.size(); ++i) {
        out << data.states[i];
        if (data.mode == ImitationMode::state_action) out << ',' << data.actions[i];
        out << '\n';
    }
}

ExpertDataset read_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw UsageError("dataset: missing header line");
    std::map<std::string, std::string> header;
    for (const auto& tok : split_ws(line)) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw UsageError("dataset header: expected key=value, got '" + tok + "'");
        header[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    for (const char* k : {"mode", "num_states", "num_actions"})
        if (!header.count(k)) throw UsageError(std::string("dataset header: missing '") + k + "'");
    if (header.size() != 3) throw UsageError("dataset header: unexpected keys");

    ExpertDataset data;
    data.mode = parse_mode(header["mode"]);
    data.num_states = parse_int(header["num_states"], "dataset num_states");
    data.num_actions = parse_int(header["num_actions"], "dataset num_actions");
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = "dataset line " + std::to_string(line_no);
        const auto comma = line.find(',');
        if (data.mode == ImitationMode::state_only) {
            if (comma != std::string::npos) throw UsageError(where + ": state_only records carry no action");
            data.states.push_back(parse_int(line, where));
        } else {
            if (comma == std::string::npos) throw UsageError(where + ": expected 'state,action'");
            data.states.push_back(parse_int(std::string_view(line).substr(0, comma), where));
            data.actions.push_back(parse_int(std::string_view(line).substr(comma + 1), where));
        }
    }
    validate_dataset(data);
    return data;
}

void save_dataset(const std::string& path, const ExpertDataset& data) {
    auto out = open_out(path);
    write_dataset(out, data);
}

ExpertDataset load_dataset(const std::string& path) {
    auto in = open_in(path);
    return read_dataset(in);
}

void write_run_csv(std::ostream& out, const RunLog& log, const RegretReport& regret, const OptimismAudit& audit) {
    const std::size_t K = log.records.size();
    if (regret.regret_total.size() != K || audit.violations.size() != K)
        throw UsageError("write_run_csv: regret/audit series do not match the run log");
    out << "k,learner_return_true_cost,expert_return,regret_pi,regret_c,regret_total,optimism_violation_count,"
           "max_abs_q,policy_entropy,trajectory_length\n";
    for (std::size_t i = 0; i < K; ++i) {
        const IterationRecord& r = log.records[i];
        out << r.k << ',' << format_double(r.learner_return) << ',' << format_double(regret.expert_return) << ','
            << format_double(regret.regret_pi[i]) << ',' << format_double(regret.regret_c[i]) << ','
            << format_double(regret.regret_total[i]) << ',' << audit.violations[i] << ','
            << format_double(r.max_abs_q) << ',' << format_double(r.policy_entropy) << ','
            << r.trajectory.length() << '\n';
    }
}

}  // namespace soaril
