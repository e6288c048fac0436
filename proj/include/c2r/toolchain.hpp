#pragma once

#include "c2r/diagnostics.hpp"

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace c2r::tc {

struct ToolchainOptions {
    std::string rustc = "rustc";
    std::string cargo = "cargo";
    std::string edition = "2021";
    std::chrono::milliseconds timeout{std::chrono::seconds(120)};
    bool keep_artifacts = false;
    std::filesystem::path artifacts_dir; // where kept workspaces go; temp dir when empty
};

/// Everything a unit compiles against: finalized translations of its
/// transitive callees, concatenated ahead of the unit's own code.
struct Scaffold {
    std::vector<std::string> prior_units; // ids, for the record
    std::vector<std::string> prior_code;  // same order

    bool operator==(const Scaffold&) const = default;
};

/// The library source compiled for `code`: lint allowances, prior code, then the unit.
std::string compose_crate(const std::string& code, const Scaffold& scaffold);

/// Throws FatalError when rustc cannot be run.
void preflight(const ToolchainOptions& options);

/// Type-checks `code` inside its scaffold as a library crate. Timeouts become a
/// synthetic TIMEOUT error diagnostic.
diag::CompileReport compile_unit(const std::string& code, const Scaffold& scaffold, const ToolchainOptions& options);

struct TestOutcome {
    bool ran = false;           // compiled and executed
    bool harness_error = false; // crashed, timed out, or produced no result line
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::string note;

    std::size_t total() const { return passed + failed; }
    bool all_passed() const { return ran && !harness_error && failed == 0 && passed > 0; }
};

/// Compiles `code` plus `tests` (the body of a #[cfg(test)] module that sees
/// the unit through `use super::*`) with the libtest harness and runs it.
TestOutcome run_unit_tests(const std::string& code, const Scaffold& scaffold, const std::string& tests,
                           const ToolchainOptions& options);

/// Parses libtest output for per-test ok/FAILED lines.
TestOutcome parse_test_output(const std::string& output);

} // namespace c2r::tc
