#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace soaril {

struct CheckResult {
    std::string suite;
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Scopes accepted by run_verification.
const std::vector<std::string>& verification_scopes();

/// Runs the invariant suites of `scope` (all, pdl, samuelson, optimism,
/// occupancy, regret) on fixed seeds. Unknown scopes throw UsageError.
std::vector<CheckResult> run_verification(std::string_view scope);

void print_check_table(std::ostream& out, const std::vector<CheckResult>& results);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace soaril
