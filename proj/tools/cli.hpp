#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace duo::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 1;
inline constexpr int exit_check_failed = 2;

/// Entry point shared by the `duo` binary and the CLI tests. `args` excludes
/// the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Exact-oracle self checks behind `duo verify`. Suites: unbiasedness,
/// conditional, type_identity, erasure, influence, all.
std::vector<CheckResult> run_verify_suite(const std::string& suite);

}  // namespace duo::cli
