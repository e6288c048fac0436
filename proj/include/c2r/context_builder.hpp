#pragma once

#include "c2r/aligner.hpp"
#include "c2r/call_graph.hpp"
#include "c2r/llm_gateway.hpp"
#include "c2r/rust_pool.hpp"
#include "c2r/util/text.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace c2r::ctx {

/// Final translation of one unit, as seen by later levels.
struct StoredTranslation {
    std::string unit_id;
    std::string code;
    bool verified = false; // compiled
    std::size_t level = 0;

    bool operator==(const StoredTranslation&) const = default;
};

/// Finished translations keyed by unit id. Written only between levels.
class TranslationStore {
public:
    void put(StoredTranslation t);
    const StoredTranslation* find(std::string_view unit_id) const;
    const std::map<std::string, StoredTranslation, std::less<>>& all() const { return by_unit_; }
    std::size_t size() const { return by_unit_.size(); }

private:
    std::map<std::string, StoredTranslation, std::less<>> by_unit_;
};

/// Named-placeholder prompt templates. Placeholders: {SOURCE}, {DEPS}, {BRIDGE},
/// {PRIOR}, {CODE}, {DIAGNOSTICS}, {SIGNATURE}, {CALLEES}.
struct PromptTemplates {
    std::string translate;
    std::string bridge;
    std::string repair;
    std::string consistency;

    static PromptTemplates defaults();
    /// Defaults overridden by translate.txt, bridge.txt, repair.txt, consistency.txt found in `dir`.
    static PromptTemplates load(const std::filesystem::path& dir);
};

/// Replaces every {KEY} whose key is in `values`; other braces are left alone.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values);

struct ContextDep {
    std::string label;   // "c record buf", "rust struct:Buf", ...
    std::string text;
    std::string entry_id; // pool entry id, empty for C-side snippets
    double score = 1.0;   // similarity for aligned entries

    bool operator==(const ContextDep&) const = default;
};

struct Summary {
    std::string name;
    std::string docstring;
    std::string entry_id;
    double score = 1.0;

    bool operator==(const Summary&) const = default;
};

struct PriorTranslation {
    std::string unit_id;
    std::string code;
    bool verified = false;

    bool operator==(const PriorTranslation&) const = default;
};

struct PromptContext {
    std::string unit_id;                  // unit id, or '+'-joined ids for a cyclic batch
    std::vector<std::string> members;     // the units translated together
    std::string c_source;                 // verbatim C source of every member
    std::vector<std::string> headers;
    std::string bridge_docstring;
    bool bridge_fallback = false;
    std::vector<ContextDep> verbatim_deps;
    std::vector<Summary> summarized_deps;
    std::vector<PriorTranslation> prior_translations;
    std::vector<std::string> dropped;     // labels removed to fit the budget
    std::size_t token_estimate = 0;       // of the rendered translation prompt

    bool operator==(const PromptContext&) const = default;
};

struct ContextOptions {
    std::size_t verbatim_threshold = 400;
    std::size_t budget = 12000;
    bool plain_deps = false; // C snippets verbatim only: no pool entries, no summaries
};

/// The prompt cannot fit the budget even with every optional dependency removed.
class ContextOverflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A callee at a lower level has no translation in the store.
class OrderingViolation : public FatalError {
public:
    using FatalError::FatalError;
};

/// Dependencies of a batch: union of the member sets, callees inside the batch removed.
c::DependencySet merge_dependencies(const std::vector<c::DependencySet>& sets, const std::vector<std::string>& members);

/// One-line mechanical summary: kind, name and member names (fields, parameters).
std::string mechanical_summary(std::string_view kind, std::string_view name, std::string_view text, bool rust_source);

struct ContextInputs {
    std::vector<const c::FunctionUnit*> units; // one unit, or a whole component
    const c::DependencySet* deps = nullptr;    // merged for batches
    const align::AlignedContext* aligned = nullptr;
    const pool::DependencyPool* pool = nullptr;
    const c::TranslationOrder* order = nullptr;
    const TranslationStore* store = nullptr;
    std::string bridge_docstring;
    bool bridge_fallback = false;
};

/// Assembles the granularity-adaptive context. Dependencies estimated at or
/// below the threshold are verbatim, larger ones summarized. Under budget
/// pressure aligned entries go first (lowest similarity, ties by id), then C-side
/// summaries, then C-side verbatim snippets, last first.
PromptContext build_context(const ContextInputs& in, const ContextOptions& options,
                            const PromptTemplates& templates = PromptTemplates::defaults());

/// Prior translations as prompt text, "(none)" when empty.
std::string render_prior(const std::vector<PriorTranslation>& prior);
/// The unit's C source with its include list, as shown in prompts.
std::string render_c_source(const PromptContext& ctx);

/// The translation prompt body (without the tag line).
std::string render_translate_prompt(const PromptContext& ctx, const PromptTemplates& templates);

struct BridgeDoc {
    std::string text;
    bool fallback = false;
};

/// BRIDGE request for the unit; on gateway failure or an empty reply, a
/// mechanical docstring with the signature and callee list.
BridgeDoc request_bridge_docstring(const std::vector<const c::FunctionUnit*>& units, const c::DependencySet& deps,
                                   llm::Gateway& gateway, const PromptTemplates& templates,
                                   const std::string& unit_id);

std::string fallback_docstring(const std::vector<const c::FunctionUnit*>& units, const c::DependencySet& deps);

} // namespace c2r::ctx
