#include "c2r/refiner.hpp"

#include "c2r/util/text.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

namespace c2r::refine {

namespace {

diag::CompileReport synthetic_failure(std::string code, std::string message) {
    diag::Diagnostic d;
    d.code = std::move(code);
    d.message = std::move(message);
    return diag::make_report({d}, 1, false, std::chrono::milliseconds(0));
}

// Turns a completion into an attempt; unusable replies become a synthetic failure without compiling.
Attempt make_attempt(Origin origin, const llm::Completion& reply, const RefineEnv& env) {
    Attempt a;
    a.origin = origin;
    a.tokens = reply.usage.prompt_tokens + reply.usage.output_tokens;
    try {
        auto code = llm::extract_code_block(reply.text);
        a.code = std::move(code.code);
        a.fenced = code.fenced;
        a.report = env.compile(a.code);
    } catch (const llm::ExtractionError& e) {
        a.report = synthetic_failure("NO_CODE", e.what());
    }
    return a;
}

std::string repair_prompt(const ctx::PromptContext& ctx, const std::string& code, const std::string& findings,
                          const RefineEnv& env) {
    return ctx::render(env.templates->repair, {{"DIAGNOSTICS", findings},
                                               {"CODE", code},
                                               {"SOURCE", ctx::render_c_source(ctx)},
                                               {"PRIOR", ctx::render_prior(ctx.prior_translations)}});
}

} // namespace

ConsistencyVerdict parse_verdict(std::string_view reply) {
    ConsistencyVerdict v;
    auto text = trim(reply);
    if (!text.empty() && text.front() == '{') {
        auto j = nlohmann::json::parse(text, nullptr, false);
        if (!j.is_discarded() && j.is_object() && j.contains("consistent") && j["consistent"].is_boolean()) {
            v.consistent = j["consistent"].get<bool>();
            if (j.contains("discrepancies") && j["discrepancies"].is_array()) {
                for (const auto& d : j["discrepancies"])
                    if (d.is_string()) v.discrepancies.push_back(d.get<std::string>());
            }
            if (v.consistent) v.discrepancies.clear();
            else if (v.discrepancies.empty()) v.discrepancies.push_back("unspecified discrepancy");
            return v;
        }
    }
    bool saw_consistent = false;
    for (const auto& raw : split_lines(text)) {
        auto line = trim(raw);
        if (starts_with_ci(line, "MISMATCH")) {
            auto rest = line.substr(8);
            if (!rest.empty() && rest.front() == ':') rest.remove_prefix(1);
            auto finding = std::string(trim(rest));
            v.discrepancies.push_back(finding.empty() ? "unspecified discrepancy" : finding);
        } else if (starts_with_ci(line, "CONSISTENT")) {
            saw_consistent = true;
        }
    }
    if (!v.discrepancies.empty()) {
        v.consistent = false;
    } else if (!saw_consistent) {
        v.parse_warning = true;
    }
    return v;
}

std::string_view to_string(Status s) {
    switch (s) {
    case Status::Compiled: return "compiled";
    case Status::Functional: return "functional";
    case Status::Failed: return "failed";
    }
    return "failed";
}

Status parse_status(std::string_view s) {
    if (s == "compiled") return Status::Compiled;
    if (s == "functional") return Status::Functional;
    if (s == "failed") return Status::Failed;
    throw FatalError("unknown unit status: " + std::string(s));
}

std::string_view to_string(Origin o) {
    switch (o) {
    case Origin::Translate: return "translate";
    case Origin::Repair: return "repair";
    case Origin::ConsistencyRepair: return "consistency-repair";
    }
    return "translate";
}

std::size_t best_attempt(const std::vector<Attempt>& attempts) {
    if (attempts.empty()) throw ContractViolation("no attempts to choose from");
    std::size_t best = 0;
    for (std::size_t i = 1; i < attempts.size(); ++i) {
        if (attempts[i].report.n_err <= attempts[best].report.n_err) best = i;
    }
    return best;
}

std::size_t repair_with_diagnostics(const ctx::PromptContext& ctx, std::vector<Attempt>& attempts, std::size_t budget,
                                    const RefineEnv& env, std::vector<std::string>& notes, std::size_t& calls) {
    std::size_t used = 0;
    while (used < budget && !attempts.empty() && attempts.back().report.n_err > 0) {
        const auto& current = attempts.back();
        auto findings = diag::format_for_prompt(current.report, env.max_diagnostics);
        auto prompt = repair_prompt(ctx, current.code, findings, env);
        ++used;
        ++calls;
        llm::Completion reply;
        try {
            reply = env.gateway->complete(llm::TaskTag::Repair, ctx.unit_id, prompt);
        } catch (const llm::BackendUnavailable& e) {
            notes.push_back(std::string("repair aborted: ") + e.what());
            break;
        }
        attempts.push_back(make_attempt(Origin::Repair, reply, env));
    }
    return used;
}

ConsistencyVerdict consistency_check(const std::string& unit_id, const std::string& c_source, const std::string& rust_code,
                                     const RefineEnv& env, std::size_t* tokens) {
    auto prompt = ctx::render(env.templates->consistency, {{"SOURCE", c_source}, {"CODE", rust_code}});
    try {
        auto reply = env.gateway->complete(llm::TaskTag::Consistency, unit_id, prompt);
        if (tokens) *tokens += reply.usage.prompt_tokens + reply.usage.output_tokens;
        auto v = parse_verdict(reply.text);
        if (v.parse_warning) spdlog::warn("unparseable consistency verdict for {}; treating as consistent", unit_id);
        return v;
    } catch (const llm::BackendUnavailable& e) {
        spdlog::warn("consistency check for {} skipped: {}", unit_id, e.what());
        ConsistencyVerdict v;
        v.skipped = true;
        return v;
    }
}

TranslationRecord refine_unit(const ctx::PromptContext& ctx, const Budgets& budgets, const RefineEnv& env) {
    if (!env.gateway || !env.compile || !env.templates) throw ContractViolation("refine_unit: incomplete environment");
    TranslationRecord rec;
    rec.unit_id = ctx.unit_id;
    rec.members = ctx.members;
    rec.bridge_fallback = ctx.bridge_fallback;

    ++rec.gateway_calls;
    try {
        auto reply = env.gateway->complete(llm::TaskTag::Translate, ctx.unit_id, ctx::render_translate_prompt(ctx, *env.templates));
        rec.attempts.push_back(make_attempt(Origin::Translate, reply, env));
    } catch (const llm::BackendUnavailable& e) {
        Attempt a;
        a.report = synthetic_failure("BACKEND", e.what());
        rec.attempts.push_back(std::move(a));
        rec.notes.push_back(std::string("translation request failed: ") + e.what());
    }

    if (!rec.attempts.back().code.empty()) {
        rec.budget_used.compile_iters =
            repair_with_diagnostics(ctx, rec.attempts, budgets.compile_iters, env, rec.notes, rec.gateway_calls);
    }

    // consistency audit on compiled code
    std::size_t audits = 0;
    while (audits < budgets.consistency_iters && rec.attempts.back().report.success) {
        ++audits;
        ++rec.gateway_calls;
        auto& current = rec.attempts.back();
        auto verdict = consistency_check(ctx.unit_id, ctx.c_source, current.code, env, &current.tokens);
        current.verdict = verdict;
        if (verdict.skipped) {
            rec.notes.push_back("consistency check skipped: gateway unavailable");
            break;
        }
        if (verdict.consistent) break;

        std::string findings = "Consistency audit findings:\n";
        for (const auto& d : verdict.discrepancies) findings += "MISMATCH: " + d + "\n";
        auto prompt = repair_prompt(ctx, current.code, findings, env);
        ++rec.budget_used.consistency_iters;
        ++rec.gateway_calls;
        try {
            auto reply = env.gateway->complete(llm::TaskTag::Repair, ctx.unit_id, prompt);
            rec.attempts.push_back(make_attempt(Origin::ConsistencyRepair, reply, env));
        } catch (const llm::BackendUnavailable& e) {
            rec.notes.push_back(std::string("consistency repair aborted: ") + e.what());
            break;
        }
        if (!rec.attempts.back().report.success) {
            rec.notes.push_back("consistency repair broke compilation");
            break;
        }
    }

    rec.final_attempt = best_attempt(rec.attempts);
    const auto& fin = rec.attempts[rec.final_attempt];
    rec.final_code = fin.code;
    if (fin.report.success && !fin.code.empty()) {
        bool audited_ok = fin.verdict && !fin.verdict->skipped && fin.verdict->consistent;
        rec.status = audited_ok ? Status::Functional : Status::Compiled;
    } else {
        rec.status = Status::Failed;
    }
    return rec;
}

} // namespace c2r::refine
