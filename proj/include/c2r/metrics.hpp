#pragma once

#include "c2r/refiner.hpp"
#include "c2r/toolchain.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace c2r::metrics {

inline constexpr const char* kReportSchema = "c2r.report/1";

struct UnitResult {
    std::string unit_id;
    refine::Status status = refine::Status::Failed;
    std::size_t n_err = 0;
    std::optional<double> codebleu;
    std::optional<bool> tests_passed; // absent: the unit has no tests
    std::string note;

    bool operator==(const UnitResult&) const = default;
};

/// Percentages are kept unrounded in memory; serialization rounds to one decimal.
struct BenchmarkReport {
    std::string name;
    std::size_t n_units = 0;
    double csr = 0.0;
    double ca = 0.0;
    std::optional<double> mean_codebleu;
    double unsafe_ratio = 0.0;
    std::vector<UnitResult> per_unit;
    std::vector<std::string> warnings;

    bool operator==(const BenchmarkReport&) const = default;
};

/// 100 * (compiled or functional) / n. Throws ContractViolation on empty input.
double compute_csr(const std::vector<refine::Status>& statuses);
double compute_csr(const std::vector<refine::TranslationRecord>& records);

/// 100 * (units whose tests all pass) / n; units without tests count as not passing.
/// Non-compiling units never pass. Throws ContractViolation on empty input.
double compute_ca(const std::vector<UnitResult>& units, std::vector<std::string>* warnings = nullptr);

struct UnsafeCount {
    std::size_t unsafe_lines = 0;
    std::size_t code_lines = 0; // non-blank, non-comment
};

/// Line classification of one Rust file. Throws on lexing errors.
UnsafeCount count_unsafe_lines(std::string_view source);

struct SourceText {
    std::string path;
    std::string text;
};

/// 100 * unsafe lines / code lines over all files; unlexable files are
/// excluded with a warning. 0 when there are no code lines.
double unsafe_ratio(const std::vector<SourceText>& files, std::vector<std::string>* warnings = nullptr);

struct CoverageOptions {
    std::string cargo = "cargo";
    std::chrono::milliseconds timeout{std::chrono::seconds(300)};
};

struct CoverageResult {
    bool covered = false;
    bool inconclusive = false; // the mutated crate did not build
    std::string file;          // where the function was found
    std::string note;
};

/// The repository's test suite fails before probing.
class ProbeRefused : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Deletion probe: replaces the body of function `name` (bare or path-qualified)
/// with a panic, reruns `cargo test`, and restores the file. covered iff the
/// suite fails. Throws ProbeRefused when the baseline suite fails, FatalError
/// when the function is missing or the tree hash changes.
CoverageResult identify_test_coverage(const std::filesystem::path& crate_root, const std::string& name,
                                      const CoverageOptions& options = {});

/// Unit-weighted means of every percentage across reports.
BenchmarkReport aggregate(const std::vector<BenchmarkReport>& reports, const std::string& name = "TOTAL");

/// Assembles a report from unit results and translated sources.
BenchmarkReport build_report(const std::string& name, std::vector<UnitResult> units, const std::vector<SourceText>& sources);

nlohmann::json to_json(const BenchmarkReport& report);
BenchmarkReport report_from_json(const nlohmann::json& j);

/// Fixed-width human-readable table, one row per report.
std::string summary_table(const std::vector<BenchmarkReport>& reports);

} // namespace c2r::metrics
