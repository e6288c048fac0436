#pragma once

#include "c2r/config.hpp"
#include "c2r/llm_gateway.hpp"
#include "c2r/metrics.hpp"
#include "c2r/refiner.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace c2r::pipeline {

enum ExitCode : int { kAllCompiled = 0, kPartial = 1, kFatal = 2 };

inline constexpr const char* kCheckpointSchema = "c2r.checkpoint/1";
inline constexpr const char* kRecordSchema = "c2r.record/1";

/// One line per pipeline stage: "<stage> ran|skipped[: detail]".
class StageTrace {
public:
    void ran(const std::string& stage, const std::string& detail = {});
    void skipped(const std::string& stage, const std::string& reason);
    const std::vector<std::string>& lines() const { return lines_; }
    bool was_skipped(const std::string& stage) const;
    bool was_run(const std::string& stage) const;
    std::string text() const;

private:
    std::vector<std::string> lines_;
};

/// Test seams. A backend given here replaces the one named by the config.
struct RunHooks {
    std::shared_ptr<llm::Backend> backend;
    llm::Gateway::Hook request_hook;
    llm::GatewayOptions gateway;
};

struct RunOptions {
    bool resume = false;
    RunHooks hooks;
};

struct RunResult {
    int exit_code = kFatal;
    std::filesystem::path run_dir;
    std::vector<refine::TranslationRecord> records;
    metrics::BenchmarkReport report;
    StageTrace trace;
    std::size_t gateway_calls = 0; // this invocation only, bridge requests included
    bool complete = false;         // every level translated
    std::string error;             // fatal error message
};

/// parse -> graph -> pool -> align -> per-level refine -> score -> report.
/// Never throws for run failures; fatal problems come back as kFatal.
RunResult run_translate(const RunConfig& config, const RunOptions& options = {});

/// Per-unit reference tests and reference translations, keyed by C unit id.
struct BenchmarkUnit {
    std::string tests;     // body of the test module
    std::string reference; // reference Rust translation
};

struct BenchmarkSpec {
    std::string name;
    std::map<std::string, BenchmarkUnit> units;
};

/// {"name": ..., "units": {"<unit id>": {"tests": ..., "reference": ...}}}. Throws FatalError.
BenchmarkSpec load_benchmark_spec(const std::filesystem::path& path);

struct EvaluateResult {
    int exit_code = kFatal;
    std::vector<metrics::BenchmarkReport> reports; // one per run dir, then TOTAL when several
    std::string error;
};

/// Scores completed runs: CSR, CA (reference tests), CodeBLEU (references),
/// unsafe ratio. Writes evaluation.json and evaluation.txt into each run dir.
EvaluateResult run_evaluate(const RunConfig& config, const std::vector<std::filesystem::path>& run_dirs,
                            const std::vector<BenchmarkSpec>& specs);

nlohmann::json record_to_json(const refine::TranslationRecord& record);
refine::TranslationRecord record_from_json(const nlohmann::json& j);

/// Records of a run directory, in file name order. Throws FatalError.
std::vector<refine::TranslationRecord> load_records(const std::filesystem::path& run_dir);

/// Unit results of the C units behind `records` (batches expand to their members).
std::vector<metrics::UnitResult> unit_results(const std::vector<refine::TranslationRecord>& records);

} // namespace c2r::pipeline
