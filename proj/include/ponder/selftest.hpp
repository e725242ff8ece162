#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ponder::cli {

struct SelftestOptions {
    /// Relative perturbation applied to every reference constant the checks
    /// compare against. Non-zero values must make the suite fail.
    double fault = 0.0;
};

struct CheckResult {
    std::string module;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

std::vector<CheckResult> run_selftest(const SelftestOptions& options = {});
void print_selftest(const std::vector<CheckResult>& results, std::ostream& out);

} // namespace ponder::cli
