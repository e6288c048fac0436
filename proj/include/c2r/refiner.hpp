#pragma once

#include "c2r/context_builder.hpp"
#include "c2r/diagnostics.hpp"
#include "c2r/llm_gateway.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace c2r::refine {

struct ConsistencyVerdict {
    bool consistent = true;
    std::vector<std::string> discrepancies;
    bool parse_warning = false; // reply not understood; treated as consistent
    bool skipped = false;       // gateway failed; no verdict reached

    bool operator==(const ConsistencyVerdict&) const = default;
};

/// "CONSISTENT" or lines "MISMATCH: ...", or JSON {"consistent": b, "discrepancies": [..]}.
/// Anything else is consistent with a parse warning.
ConsistencyVerdict parse_verdict(std::string_view reply);

enum class Status { Compiled, Functional, Failed };
std::string_view to_string(Status s);
Status parse_status(std::string_view s);

enum class Origin { Translate, Repair, ConsistencyRepair };
std::string_view to_string(Origin o);

struct Attempt {
    Origin origin = Origin::Translate;
    std::string code;
    diag::CompileReport report;
    std::optional<ConsistencyVerdict> verdict;
    std::size_t tokens = 0;  // prompt + output tokens of the requests behind this attempt
    bool fenced = false;     // code came from a fenced block

    bool operator==(const Attempt&) const = default;
};

struct Budgets {
    std::size_t compile_iters = 3;
    std::size_t consistency_iters = 2;

    bool operator==(const Budgets&) const = default;
};

struct TranslationRecord {
    std::string unit_id;
    std::vector<std::string> members;
    std::vector<Attempt> attempts;
    std::string final_code;
    std::size_t final_attempt = 0;
    Status status = Status::Failed;
    Budgets budget_used{0, 0};
    std::size_t gateway_calls = 0; // excluding the bridge docstring request
    bool bridge_fallback = false;
    std::vector<std::string> scaffold_units;
    std::vector<std::string> notes;

    bool operator==(const TranslationRecord&) const = default;
};

/// Index of the attempt with the fewest errors, latest on ties.
std::size_t best_attempt(const std::vector<Attempt>& attempts);

using CompileFn = std::function<diag::CompileReport(const std::string& code)>;

/// Shared knobs of one refinement.
struct RefineEnv {
    llm::Gateway* gateway = nullptr;
    CompileFn compile;
    const ctx::PromptTemplates* templates = nullptr;
    std::size_t max_diagnostics = 20;
};

/// Up to `budget` REPAIR rounds on failing code, stopping at the first clean
/// compile. New attempts are appended to `attempts`; returns the rounds used.
/// A gateway failure ends the loop and is noted.
std::size_t repair_with_diagnostics(const ctx::PromptContext& ctx, std::vector<Attempt>& attempts, std::size_t budget,
                                    const RefineEnv& env, std::vector<std::string>& notes, std::size_t& calls);

/// One CONSISTENCY request. Gateway failure yields a skipped verdict.
ConsistencyVerdict consistency_check(const std::string& unit_id, const std::string& c_source, const std::string& rust_code,
                                     const RefineEnv& env, std::size_t* tokens = nullptr);

/// TRANSLATE, compile, diagnostic repair, then the consistency audit.
/// Each audit that finds discrepancies costs one REPAIR request and one
/// recompile from the consistency budget; at most consistency_iters audits run.
TranslationRecord refine_unit(const ctx::PromptContext& ctx, const Budgets& budgets, const RefineEnv& env);

} // namespace c2r::refine
