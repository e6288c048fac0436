#include "c2r/call_graph.hpp"

#include "c2r/util/text.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace c2r {

Condensation condense(const Digraph& g) {
    const std::size_t n = g.size();
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> raw;
    std::size_t counter = 0;

    // iterative Tarjan: frames of (node, next successor position)
    std::vector<std::pair<std::size_t, std::size_t>> frames;
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        frames.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& [v, pos] = frames.back();
            if (pos < g.succ[v].size()) {
                std::size_t w = g.succ[v][pos++];
                if (index[w] == unvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::vector<std::size_t> comp;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                raw.push_back(std::move(comp));
            }
            std::size_t finished = v;
            frames.pop_back();
            if (!frames.empty()) {
                std::size_t parent = frames.back().first;
                low[parent] = std::min(low[parent], low[finished]);
            }
        }
    }

    std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    Condensation c;
    c.component_of.assign(n, 0);
    c.members = std::move(raw);
    for (std::size_t ci = 0; ci < c.members.size(); ++ci) {
        for (auto v : c.members[ci]) c.component_of[v] = ci;
    }
    c.succ.assign(c.members.size(), {});
    for (std::size_t v = 0; v < n; ++v) {
        for (auto w : g.succ[v]) {
            auto a = c.component_of[v];
            auto b = c.component_of[w];
            if (a != b) c.succ[a].push_back(b);
        }
    }
    for (auto& s : c.succ) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    return c;
}

std::vector<std::size_t> component_levels(const Condensation& c) {
    const std::size_t n = c.members.size();
    std::vector<std::size_t> level(n, 0);
    std::vector<char> state(n, 0); // 0 new, 1 open, 2 done
    std::vector<std::pair<std::size_t, std::size_t>> frames;
    for (std::size_t root = 0; root < n; ++root) {
        if (state[root]) continue;
        frames.push_back({root, 0});
        state[root] = 1;
        while (!frames.empty()) {
            auto& [v, pos] = frames.back();
            if (pos < c.succ[v].size()) {
                std::size_t w = c.succ[v][pos++];
                if (!state[w]) {
                    state[w] = 1;
                    frames.push_back({w, 0});
                }
                continue;
            }
            std::size_t lv = 0;
            for (auto w : c.succ[v]) lv = std::max(lv, level[w] + 1);
            level[v] = lv;
            state[v] = 2;
            frames.pop_back();
        }
    }
    return level;
}

} // namespace c2r

namespace c2r::c {

namespace {

bool is_ident(const Token& t) { return t.kind == TokKind::Identifier; }

struct BodyScan {
    std::set<std::string> identifiers;
    std::set<std::string> tags; // identifiers right after struct/union/enum
};

BodyScan scan_identifiers(std::string_view text) {
    BodyScan scan;
    auto toks = lex(text);
    for (std::size_t k = 0; k < toks.size(); ++k) {
        if (!is_ident(toks[k])) continue;
        bool tagged = k > 0 && toks[k - 1].kind == TokKind::Keyword &&
                      (toks[k - 1].text == "struct" || toks[k - 1].text == "union" || toks[k - 1].text == "enum");
        if (tagged) scan.tags.emplace(toks[k].text);
        else scan.identifiers.emplace(toks[k].text);
    }
    return scan;
}

bool is_function_macro(const RepoModel& repo, std::string_view name) {
    for (const auto& d : repo.definitions()) {
        if (d.kind == DefKind::Macro && d.name == name) return true;
    }
    return false;
}

} // namespace

std::size_t CallGraph::index_of(std::string_view id) const {
    auto it = std::find(nodes.begin(), nodes.end(), id);
    if (it == nodes.end()) throw FatalError("unknown unit id: " + std::string(id));
    return static_cast<std::size_t>(it - nodes.begin());
}

std::vector<std::string> CallGraph::callees(std::string_view id) const {
    std::vector<std::string> out;
    for (auto w : graph.succ[index_of(id)]) out.push_back(nodes[w]);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> CallGraph::component_members(std::string_view id) const {
    std::vector<std::string> out;
    for (auto v : condensation.members[condensation.component_of[index_of(id)]]) out.push_back(nodes[v]);
    return out;
}

CallGraph build_call_graph(const RepoModel& repo) {
    CallGraph cg;
    const auto& units = repo.units();
    cg.graph = Digraph(units.size());
    for (const auto& u : units) cg.nodes.push_back(u.id);

    for (std::size_t ui = 0; ui < units.size(); ++ui) {
        const auto& u = units[ui];
        auto toks = lex(u.source);
        const std::size_t body_offset = u.body.begin - u.span.begin;

        std::set<std::string> params;
        for (const auto& t : toks) {
            if (t.span.begin >= body_offset) break;
            if (is_ident(t)) params.emplace(t.text);
        }
        params.erase(u.name);

        std::set<std::size_t> targets;
        std::set<std::string> externals;
        std::vector<std::string> notes;
        for (std::size_t k = 0; k + 1 < toks.size(); ++k) {
            if (toks[k].span.begin < body_offset) continue;
            if (!toks[k + 1].punct("(")) continue;
            const Token& t = toks[k];
            if (t.punct(")")) {
                // (*fp)(...) style
                std::size_t depth = 0;
                for (std::size_t j = k + 1; j-- > 0;) {
                    if (toks[j].punct(")")) ++depth;
                    else if (toks[j].punct("(") && --depth == 0) {
                        if (j + 1 < k && toks[j + 1].punct("*")) notes.push_back("indirect call through expression ignored");
                        break;
                    }
                }
                continue;
            }
            if (!is_ident(t)) continue;
            std::string name(t.text);
            if (k > 0 && (toks[k - 1].punct(".") || toks[k - 1].punct("->"))) {
                notes.push_back("indirect call through member '" + name + "' ignored");
                continue;
            }
            auto candidates = repo.units_named(name);
            if (candidates.empty()) {
                if (params.count(name)) notes.push_back("indirect call through parameter '" + name + "' ignored");
                else if (!is_function_macro(repo, name)) externals.insert(name);
                continue;
            }
            std::vector<std::size_t> same_file;
            std::vector<std::size_t> visible;
            for (auto c : candidates) {
                if (units[c].file == u.file) same_file.push_back(c);
                else if (!units[c].is_static) visible.push_back(c);
            }
            const auto& chosen = !same_file.empty() ? same_file : (!visible.empty() ? visible : candidates);
            if (chosen.size() > 1) {
                std::string list;
                for (auto c : chosen) list += (list.empty() ? "" : ", ") + units[c].id;
                notes.push_back("ambiguous call '" + name + "': " + list);
            }
            targets.insert(chosen.begin(), chosen.end());
        }
        for (auto v : targets) {
            cg.graph.add_edge(ui, v);
            cg.edges.emplace_back(u.id, units[v].id);
        }
        if (!externals.empty()) cg.externals[u.id] = {externals.begin(), externals.end()};
        if (!notes.empty()) {
            std::sort(notes.begin(), notes.end());
            notes.erase(std::unique(notes.begin(), notes.end()), notes.end());
            cg.notes[u.id] = std::move(notes);
        }
    }
    std::sort(cg.edges.begin(), cg.edges.end());
    cg.condensation = condense(cg.graph);
    return cg;
}

DependencySet extract_dependency_set(std::string_view unit_id, const RepoModel& repo, const CallGraph& graph) {
    const FunctionUnit* unit = repo.find_unit(unit_id);
    if (!unit) throw FatalError("unknown unit id: " + std::string(unit_id));

    DependencySet deps;
    deps.unit_id = unit->id;
    deps.callees = graph.callees(unit->id);
    if (const auto* f = repo.find_file(unit->file)) deps.headers = f->includes;
    if (auto it = graph.externals.find(unit->id); it != graph.externals.end()) deps.externals = it->second;
    if (auto it = graph.notes.find(unit->id); it != graph.notes.end()) {
        for (const auto& note : it->second) {
            if (note.starts_with("ambiguous call '")) {
                auto end = note.find('\'', 16);
                deps.ambiguous.push_back(note.substr(16, end - 16));
            }
        }
    }

    const auto& defs = repo.definitions();
    // matched definition indices keyed by (kind, name) so same-name candidates can be resolved together
    std::map<std::pair<DefKind, std::string>, std::vector<std::size_t>> matches;
    auto match_text = [&](std::string_view text) {
        auto scan = scan_identifiers(text);
        for (std::size_t i = 0; i < defs.size(); ++i) {
            const auto& d = defs[i];
            for (const auto& n : d.names) {
                if (scan.identifiers.count(n)) matches[{d.kind, n}].push_back(i);
            }
            for (const auto& t : d.tags) {
                if (scan.tags.count(t)) matches[{d.kind, t}].push_back(i);
            }
        }
    };
    match_text(unit->source);

    std::set<std::size_t> chosen;
    std::set<std::size_t> expanded;
    // Resolve, then pull in records and macros that chosen records mention (struct fields, array sizes).
    for (;;) {
        for (auto& [key, idx] : matches) {
            std::sort(idx.begin(), idx.end());
            idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
            std::vector<std::size_t> defined;
            for (auto i : idx) {
                if (!defs[i].is_extern) defined.push_back(i);
            }
            const auto& pool = defined.empty() ? idx : defined;
            std::vector<std::size_t> same_file;
            for (auto i : pool) {
                if (defs[i].file == unit->file) same_file.push_back(i);
            }
            const auto& pick = same_file.empty() ? pool : same_file;
            if (pick.size() > 1) {
                std::set<std::string> distinct;
                for (auto i : pick) distinct.insert(defs[i].text);
                if (distinct.size() > 1) deps.ambiguous.push_back(key.second);
            }
            chosen.insert(pick.begin(), pick.end());
        }
        bool grew = false;
        for (auto i : std::set<std::size_t>(chosen)) {
            if (defs[i].kind != DefKind::Record || !expanded.insert(i).second) continue;
            match_text(defs[i].text);
            grew = true;
        }
        if (!grew) break;
    }

    auto add = [](std::vector<Snippet>& field, const Definition& d) {
        Snippet s{d.name, d.file, d.text};
        if (std::find(field.begin(), field.end(), s) == field.end()) field.push_back(std::move(s));
    };
    for (auto i : chosen) {
        const auto& d = defs[i];
        switch (d.kind) {
        case DefKind::Global: add(deps.globals, d); break;
        case DefKind::Record: add(deps.records, d); break;
        case DefKind::Macro: add(deps.macros, d); break;
        }
    }
    std::sort(deps.ambiguous.begin(), deps.ambiguous.end());
    deps.ambiguous.erase(std::unique(deps.ambiguous.begin(), deps.ambiguous.end()), deps.ambiguous.end());
    return deps;
}

TranslationOrder topological_order(const CallGraph& graph) {
    TranslationOrder order;
    auto comp_level = component_levels(graph.condensation);
    std::size_t max_level = 0;
    for (auto l : comp_level) max_level = std::max(max_level, l);
    if (!graph.nodes.empty()) order.levels.resize(max_level + 1);
    for (std::size_t v = 0; v < graph.nodes.size(); ++v) {
        auto l = comp_level[graph.condensation.component_of[v]];
        order.levels[l].push_back(graph.nodes[v]);
        order.level_of[graph.nodes[v]] = l;
    }
    for (auto& level : order.levels) std::sort(level.begin(), level.end());
    return order;
}

std::string dump_graph(const CallGraph& graph, const TranslationOrder& order) {
    std::ostringstream out;
    out << "# id\tlevel\tcomponent\tcallees\texternals\n";
    for (std::size_t v = 0; v < graph.nodes.size(); ++v) {
        const auto& id = graph.nodes[v];
        out << id << '\t' << order.level_of.at(id) << '\t' << graph.condensation.component_of[v] << '\t';
        auto callees = graph.callees(id);
        for (std::size_t i = 0; i < callees.size(); ++i) out << (i ? "," : "") << callees[i];
        out << '\t';
        if (auto it = graph.externals.find(id); it != graph.externals.end()) {
            for (std::size_t i = 0; i < it->second.size(); ++i) out << (i ? "," : "") << it->second[i];
        }
        out << '\n';
    }
    return out.str();
}

} // namespace c2r::c
