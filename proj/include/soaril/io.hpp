#pragma once

#include "soaril/analysis.hpp"
#include "soaril/expert.hpp"
#include "soaril/mdp.hpp"
#include "soaril/soar.hpp"

#include <iosfwd>
#include <string>
#include <string_view>

namespace soaril {

/// Shortest decimal that round-trips, independent of the C locale.
std::string format_double(double x);

/// Parses a full token as a double ("inf" accepted); throws UsageError.
double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);

// MDP text format. Blank lines and '#' comments are ignored.
//
//   num_states 2
//   num_actions 3
//   discount 0.9
//   init 1 0
//   cost            followed by S rows of A numbers
//   transitions     followed by S*A rows of S numbers, row s*A+a
void write_mdp(std::ostream& out, const TabularMdpd& mdp);
/// Throws UsageError on malformed input or when validate_mdp reports anything.
TabularMdpd read_mdp(std::istream& in);
void save_mdp(const std::string& path, const TabularMdpd& mdp);
TabularMdpd load_mdp(const std::string& path);

// Expert dataset format: a header line
//   mode=state_only num_states=2 num_actions=20
// then one record per line, "s" or "s,a".
void write_dataset(std::ostream& out, const ExpertDataset& data);
ExpertDataset read_dataset(std::istream& in);
void save_dataset(const std::string& path, const ExpertDataset& data);
ExpertDataset load_dataset(const std::string& path);

/// Per-iteration CSV of a run; one header line and K rows, LF endings.
void write_run_csv(std::ostream& out, const RunLog& log, const RegretReport& regret, const OptimismAudit& audit);

}  // namespace soaril
