#include "c2r/context_builder.hpp"

#include "c2r/c_lexer.hpp"
#include "c2r/rust_lexer.hpp"
#include "c2r/tokens.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <set>

namespace fs = std::filesystem;

namespace c2r::ctx {

void TranslationStore::put(StoredTranslation t) {
    auto id = t.unit_id;
    by_unit_[id] = std::move(t);
}

const StoredTranslation* TranslationStore::find(std::string_view unit_id) const {
    auto it = by_unit_.find(unit_id);
    return it == by_unit_.end() ? nullptr : &it->second;
}

PromptTemplates PromptTemplates::defaults() {
    PromptTemplates t;
    t.translate =
        "{BRIDGE}\n"
        "\n"
        "Translate the C code below into Rust.\n"
        "Keep the function names. Call the already translated functions instead of redefining them.\n"
        "\n"
        "## C source\n"
        "{SOURCE}\n"
        "\n"
        "## Dependencies\n"
        "{DEPS}\n"
        "\n"
        "## Already translated\n"
        "{PRIOR}\n";
    t.bridge =
        "Write a short docstring for the C code below. Say what it computes and what a Rust version must "
        "provide.\n"
        "Signature: {SIGNATURE}\n"
        "Calls: {CALLEES}\n"
        "\n"
        "{SOURCE}\n";
    t.repair =
        "The Rust translation below has problems.\n"
        "\n"
        "## Diagnostics\n"
        "{DIAGNOSTICS}\n"
        "\n"
        "## Rust code\n"
        "```rust\n"
        "{CODE}\n"
        "```\n"
        "\n"
        "## C source\n"
        "{SOURCE}\n"
        "\n"
        "## Already translated\n"
        "{PRIOR}\n";
    t.consistency =
        "Compare the C source with its Rust translation.\n"
        "\n"
        "## C source\n"
        "{SOURCE}\n"
        "\n"
        "## Rust code\n"
        "```rust\n"
        "{CODE}\n"
        "```\n";
    return t;
}

PromptTemplates PromptTemplates::load(const fs::path& dir) {
    auto t = defaults();
    if (!fs::is_directory(dir)) throw FatalError("template directory not found: " + dir.string());
    auto take = [&](const char* file, std::string& slot) {
        auto p = dir / file;
        if (fs::exists(p)) slot = read_file(p);
    };
    take("translate.txt", t.translate);
    take("bridge.txt", t.bridge);
    take("repair.txt", t.repair);
    take("consistency.txt", t.consistency);
    return t;
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

c::DependencySet merge_dependencies(const std::vector<c::DependencySet>& sets, const std::vector<std::string>& members) {
    c::DependencySet out;
    for (std::size_t i = 0; i < members.size(); ++i) out.unit_id += (i ? "+" : "") + members[i];
    std::set<std::string> member_set(members.begin(), members.end());
    auto add_unique = [](auto& field, const auto& value) {
        if (std::find(field.begin(), field.end(), value) == field.end()) field.push_back(value);
    };
    for (const auto& s : sets) {
        for (const auto& c : s.callees) {
            if (!member_set.count(c)) add_unique(out.callees, c);
        }
        for (const auto& h : s.headers) add_unique(out.headers, h);
        for (const auto& g : s.globals) add_unique(out.globals, g);
        for (const auto& r : s.records) add_unique(out.records, r);
        for (const auto& m : s.macros) add_unique(out.macros, m);
        for (const auto& e : s.externals) add_unique(out.externals, e);
        for (const auto& a : s.ambiguous) add_unique(out.ambiguous, a);
    }
    return out;
}

std::string mechanical_summary(std::string_view kind, std::string_view name, std::string_view text, bool rust_side) {
    // Rust items name members before ':', C declarations before ';' ',' ')' '['.
    std::vector<std::string> members;
    auto add = [&](std::string_view ident) {
        if (ident == name || members.size() >= 12) return;
        if (std::find(members.begin(), members.end(), ident) == members.end()) members.emplace_back(ident);
    };
    try {
        if (rust_side) {
            auto toks = rust::lex(text);
            for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
                if (toks[i].kind == rust::TokKind::Ident && toks[i + 1].kind == rust::TokKind::Punct && toks[i + 1].text == ":")
                    add(toks[i].text);
            }
        } else {
            auto toks = c::lex(text);
            for (std::size_t i = 1; i + 1 < toks.size(); ++i) {
                const auto& t = toks[i];
                const auto& next = toks[i + 1];
                if (t.kind != c::TokKind::Identifier || next.kind != c::TokKind::Punct) continue;
                if (next.text == ";" || next.text == "," || next.text == ")" || next.text == "[") add(t.text);
            }
        }
    } catch (const std::exception&) {
        // lexing is best effort here; a summary without members is still useful
    }
    std::string out = std::string(kind) + " " + std::string(name);
    if (!members.empty()) {
        out += ": members ";
        for (std::size_t i = 0; i < members.size(); ++i) out += (i ? ", " : "") + members[i];
    }
    return out;
}

namespace {

std::string join(const std::vector<std::string>& v, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? std::string(sep) : "") + v[i];
    return out;
}

std::string render_source(const PromptContext& ctx) {
    std::string out;
    if (!ctx.headers.empty()) out += "// includes: " + join(ctx.headers, ", ") + "\n";
    out += ctx.c_source;
    return out;
}

std::string render_deps(const PromptContext& ctx) {
    std::string out;
    for (const auto& d : ctx.verbatim_deps) out += "// " + d.label + "\n" + d.text + "\n\n";
    for (const auto& s : ctx.summarized_deps) out += "// summary of " + s.name + ": " + s.docstring + "\n";
    auto t = trim(out);
    return t.empty() ? "(none)" : std::string(t);
}

// Optional context pieces, in the order they are given up under budget pressure.
struct Droppable {
    enum Kind { AlignedVerbatim, AlignedSummary, CSummary, CVerbatim } kind;
    std::size_t index;
};

} // namespace

std::string render_prior(const std::vector<PriorTranslation>& prior) {
    std::string out;
    for (const auto& p : prior) {
        out += "// " + p.unit_id + (p.verified ? "" : " (unverified)") + "\n" + p.code + "\n\n";
    }
    auto t = trim(out);
    return t.empty() ? "(none)" : std::string(t);
}

std::string render_c_source(const PromptContext& ctx) { return render_source(ctx); }

std::string render_translate_prompt(const PromptContext& ctx, const PromptTemplates& templates) {
    std::string bridge = ctx.bridge_docstring.empty() ? "" : "/// " + ctx.bridge_docstring;
    if (!bridge.empty()) {
        std::string fixed;
        for (char c : bridge) {
            fixed += c;
            if (c == '\n') fixed += "/// ";
        }
        bridge = fixed;
    }
    return render(templates.translate, {{"BRIDGE", bridge},
                                        {"SOURCE", render_source(ctx)},
                                        {"DEPS", render_deps(ctx)},
                                        {"PRIOR", render_prior(ctx.prior_translations)}});
}

PromptContext build_context(const ContextInputs& in, const ContextOptions& options, const PromptTemplates& templates) {
    if (in.units.empty() || !in.deps || !in.order || !in.store) throw ContractViolation("build_context: missing inputs");
    PromptContext ctx;
    for (const auto* u : in.units) {
        ctx.members.push_back(u->id);
        if (!ctx.c_source.empty()) ctx.c_source += "\n\n";
        ctx.c_source += u->source;
    }
    ctx.unit_id = join(ctx.members, "+");
    ctx.headers = in.deps->headers;
    ctx.bridge_docstring = in.bridge_docstring;
    ctx.bridge_fallback = in.bridge_fallback;

    std::size_t level = 0;
    if (auto it = in.order->level_of.find(ctx.members.front()); it != in.order->level_of.end()) level = it->second;

    // prior translations of direct callees
    std::set<std::string> seen_code;
    for (const auto& callee : in.deps->callees) {
        const auto* t = in.store->find(callee);
        if (!t) {
            auto lv = in.order->level_of.find(callee);
            std::string where = lv == in.order->level_of.end() ? "unknown level" : "level " + std::to_string(lv->second);
            throw OrderingViolation("callee " + callee + " (" + where + ") of " + ctx.unit_id +
                                    " (level " + std::to_string(level) + ") has no translation yet");
        }
        if (auto lv = in.order->level_of.find(callee); lv != in.order->level_of.end() && lv->second >= level)
            throw OrderingViolation("callee " + callee + " is not at a lower level than " + ctx.unit_id);
        if (!seen_code.insert(t->code).second) continue;
        ctx.prior_translations.push_back({t->unit_id, t->code, t->verified});
    }

    // C-side dependencies
    std::vector<ContextDep> c_verbatim;
    std::vector<Summary> c_summary;
    auto add_c = [&](std::string_view kind, const std::vector<c::Snippet>& snippets) {
        for (const auto& s : snippets) {
            std::string label = "c " + std::string(kind) + " " + s.name;
            if (options.plain_deps || estimate_tokens(s.text) <= options.verbatim_threshold) {
                c_verbatim.push_back({label, s.text, "", 1.0});
            } else {
                c_summary.push_back({s.name, mechanical_summary(kind, s.name, s.text, false), "", 1.0});
            }
        }
    };
    add_c("record", in.deps->records);
    add_c("global", in.deps->globals);
    add_c("macro", in.deps->macros);

    // aligned pool entries, best score per entry; parents inherit the score of the child that pulled them in
    std::vector<ContextDep> a_verbatim;
    std::vector<Summary> a_summary;
    if (!options.plain_deps && in.aligned && in.pool) {
        std::map<std::string, double> best;
        for (const auto& m : in.aligned->matches) {
            auto [it, fresh] = best.emplace(m.entry_id, m.score);
            if (!fresh) it->second = std::max(it->second, m.score);
        }
        for (const auto& m : in.aligned->matches) {
            const auto* e = in.pool->find(m.entry_id);
            if (e && e->parent_id) {
                auto [it, fresh] = best.emplace(*e->parent_id, best[m.entry_id]);
                if (!fresh) it->second = std::max(it->second, best[m.entry_id]);
            }
        }
        std::vector<std::pair<std::string, double>> ordered(best.begin(), best.end());
        std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        for (const auto& [id, score] : ordered) {
            const auto* e = in.pool->find(id);
            if (!e) continue;
            if (estimate_tokens(e->source) <= options.verbatim_threshold) {
                a_verbatim.push_back({"rust " + e->id, e->source, e->id, score});
            } else {
                std::string doc = e->doc.empty() ? mechanical_summary(pool::to_string(e->category), e->name, e->source, true) : e->doc;
                a_summary.push_back({e->qualified_name, doc, e->id, score});
            }
        }
    }

    // drop queue: aligned entries lowest score first (ties by id), then C summaries, then C snippets, last first
    std::vector<Droppable> queue;
    {
        std::vector<std::tuple<double, std::string, Droppable>> aligned;
        for (std::size_t i = 0; i < a_verbatim.size(); ++i)
            aligned.emplace_back(a_verbatim[i].score, a_verbatim[i].entry_id, Droppable{Droppable::AlignedVerbatim, i});
        for (std::size_t i = 0; i < a_summary.size(); ++i)
            aligned.emplace_back(a_summary[i].score, a_summary[i].entry_id, Droppable{Droppable::AlignedSummary, i});
        std::sort(aligned.begin(), aligned.end(), [](const auto& a, const auto& b) {
            if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
            return std::get<1>(a) < std::get<1>(b);
        });
        for (const auto& a : aligned) queue.push_back(std::get<2>(a));
        for (std::size_t i = c_summary.size(); i-- > 0;) queue.push_back({Droppable::CSummary, i});
        for (std::size_t i = c_verbatim.size(); i-- > 0;) queue.push_back({Droppable::CVerbatim, i});
    }

    std::vector<bool> gone_av(a_verbatim.size()), gone_as(a_summary.size()), gone_cs(c_summary.size()), gone_cv(c_verbatim.size());
    std::size_t next_drop = 0;
    for (;;) {
        ctx.verbatim_deps.clear();
        ctx.summarized_deps.clear();
        for (std::size_t i = 0; i < c_verbatim.size(); ++i)
            if (!gone_cv[i]) ctx.verbatim_deps.push_back(c_verbatim[i]);
        for (std::size_t i = 0; i < a_verbatim.size(); ++i)
            if (!gone_av[i]) ctx.verbatim_deps.push_back(a_verbatim[i]);
        for (std::size_t i = 0; i < c_summary.size(); ++i)
            if (!gone_cs[i]) ctx.summarized_deps.push_back(c_summary[i]);
        for (std::size_t i = 0; i < a_summary.size(); ++i)
            if (!gone_as[i]) ctx.summarized_deps.push_back(a_summary[i]);

        ctx.token_estimate = estimate_tokens(render_translate_prompt(ctx, templates));
        if (ctx.token_estimate <= options.budget) break;
        if (next_drop == queue.size())
            throw ContextOverflow("context for " + ctx.unit_id + " needs " + std::to_string(ctx.token_estimate) +
                                  " tokens even without optional dependencies (budget " + std::to_string(options.budget) + ")");
        const auto& d = queue[next_drop++];
        switch (d.kind) {
        case Droppable::AlignedVerbatim: gone_av[d.index] = true; ctx.dropped.push_back(a_verbatim[d.index].label); break;
        case Droppable::AlignedSummary: gone_as[d.index] = true; ctx.dropped.push_back("summary " + a_summary[d.index].name); break;
        case Droppable::CSummary: gone_cs[d.index] = true; ctx.dropped.push_back("summary " + c_summary[d.index].name); break;
        case Droppable::CVerbatim: gone_cv[d.index] = true; ctx.dropped.push_back(c_verbatim[d.index].label); break;
        }
    }
    return ctx;
}

std::string fallback_docstring(const std::vector<const c::FunctionUnit*>& units, const c::DependencySet& deps) {
    std::string out;
    for (const auto* u : units) out += (out.empty() ? "" : "\n") + u->signature;
    std::vector<std::string> callees = deps.callees;
    callees.insert(callees.end(), deps.externals.begin(), deps.externals.end());
    out += "\nCalls: " + (callees.empty() ? std::string("nothing") : join(callees, ", "));
    return out;
}

BridgeDoc request_bridge_docstring(const std::vector<const c::FunctionUnit*>& units, const c::DependencySet& deps,
                                   llm::Gateway& gateway, const PromptTemplates& templates, const std::string& unit_id) {
    std::vector<std::string> sigs;
    std::string source;
    for (const auto* u : units) {
        sigs.push_back(u->signature);
        if (!source.empty()) source += "\n\n";
        source += u->source;
    }
    std::vector<std::string> callees = deps.callees;
    callees.insert(callees.end(), deps.externals.begin(), deps.externals.end());
    auto prompt = render(templates.bridge, {{"SIGNATURE", join(sigs, "; ")},
                                            {"CALLEES", callees.empty() ? "nothing" : join(callees, ", ")},
                                            {"SOURCE", source}});
    try {
        auto reply = gateway.complete(llm::TaskTag::Bridge, unit_id, prompt);
        auto text = std::string(trim(reply.text));
        if (!text.empty()) return {text, false};
        spdlog::warn("empty bridge docstring for {}, using fallback", unit_id);
    } catch (const llm::BackendUnavailable& e) {
        spdlog::warn("bridge docstring for {} unavailable: {}", unit_id, e.what());
    }
    return {fallback_docstring(units, deps), true};
}

} // namespace c2r::ctx
