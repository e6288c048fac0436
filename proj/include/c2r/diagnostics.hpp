#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace c2r::diag {

enum class Severity { Error, Warning, Note, Help, Other };

std::string_view to_string(Severity s);
Severity parse_severity(std::string_view level);

struct Location {
    std::string file;
    std::size_t line = 0;
    std::size_t column = 0;

    bool operator==(const Location&) const = default;
};

struct Diagnostic {
    std::string code;          // "E0425", "TIMEOUT", or empty
    Severity severity = Severity::Error;
    std::string message;
    std::optional<Location> location; // primary span
    std::string source_line;   // text of the primary span's first line
    std::string rendered;      // compiler's own human rendering, if any

    bool operator==(const Diagnostic&) const = default;
};

struct CompileReport {
    bool success = false;
    std::size_t n_err = 0;     // error-severity diagnostics only
    std::vector<Diagnostic> diagnostics;
    std::chrono::milliseconds elapsed{0};
    int exit_code = 0;
    bool timed_out = false;

    bool operator==(const CompileReport&) const = default;
    bool has_code(std::string_view code) const;
};

/// Parses `--error-format=json` output: one JSON object per line, other
/// lines ignored. The trailing "aborting due to" summary is not a diagnostic.
std::vector<Diagnostic> parse_rustc_json(std::string_view output);

std::size_t count_errors(const std::vector<Diagnostic>& diagnostics);

/// Builds a report; success requires a zero exit status and no errors.
CompileReport make_report(std::vector<Diagnostic> diagnostics, int exit_code, bool timed_out,
                          std::chrono::milliseconds elapsed);

/// Repair-prompt rendering: "error[CODE]: message", location, source line;
/// errors before warnings, at most `limit` entries.
std::string format_for_prompt(const CompileReport& report, std::size_t limit = 20);

} // namespace c2r::diag
