#include "c2r/aligner.hpp"

#include "c2r/util/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <set>

namespace c2r::align {

VectorIndex::VectorIndex(const pool::DependencyPool& pool, Embedder& embedder) {
    std::vector<std::string> ids;
    std::vector<std::string> texts;
    for (const auto& [id, entry] : pool.entries()) {
        ids.push_back(id);
        texts.push_back(entry_text(entry));
    }
    if (texts.empty()) return;
    auto vecs = embedder.embed_batch(texts);
    for (std::size_t i = 0; i < ids.size(); ++i) vectors_.emplace(ids[i], std::move(vecs.at(i)));
}

const EmbeddingVector* VectorIndex::find(const std::string& id) const {
    auto it = vectors_.find(id);
    return it == vectors_.end() ? nullptr : &it->second;
}

std::string VectorIndex::entry_text(const pool::PoolEntry& entry) { return entry.name + "\n" + entry.source; }

std::vector<Match> retrieve(const std::string& dependency, const EmbeddingVector& query,
                            const pool::DependencyPool& pool, const VectorIndex& index,
                            std::size_t k, double floor) {
    if (k == 0) throw ContractViolation("retrieve needs k >= 1");
    std::vector<Match> all;
    for (const auto& [id, entry] : pool.entries()) {
        const auto* v = index.find(id);
        if (!v) throw ContractViolation("vector index does not cover pool entry " + id);
        double s = cosine(query, *v);
        if (s < floor) continue;
        all.push_back(Match{dependency, id, s});
    }
    auto better = [](const Match& a, const Match& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.entry_id < b.entry_id;
    };
    if (all.size() > k) {
        std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
        all.resize(k);
    } else {
        std::sort(all.begin(), all.end(), better);
    }
    return all;
}

AlignedContext augment_parents(std::vector<Match> matches, const pool::DependencyPool& pool) {
    AlignedContext out;
    out.matches = std::move(matches);
    return augment_parents(std::move(out), pool);
}

AlignedContext augment_parents(AlignedContext context, const pool::DependencyPool& pool) {
    std::set<std::string> seen(context.augmented.begin(), context.augmented.end());
    for (const auto& m : context.matches) {
        const auto* e = pool.find(m.entry_id);
        if (!e) throw ContractViolation("match references unknown pool entry " + m.entry_id);
        if (e->parent_id && seen.insert(*e->parent_id).second) context.augmented.push_back(*e->parent_id);
    }
    return context;
}

std::vector<DependencyQuery> queries_for(const c::DependencySet& deps) {
    std::vector<DependencyQuery> out;
    auto add = [&](std::string_view kind, const std::vector<c::Snippet>& snippets) {
        for (const auto& s : snippets) out.push_back({std::string(kind) + ":" + s.name, s.name, s.name + "\n" + s.text});
    };
    add("record", deps.records);
    add("global", deps.globals);
    add("macro", deps.macros);
    for (const auto& name : deps.externals) out.push_back({"external:" + name, name, name});
    return out;
}

AlignedContext align_dependencies(const c::DependencySet& deps, const pool::DependencyPool& pool,
                                  const VectorIndex* index, Embedder* embedder, const AlignOptions& options) {
    auto queries = queries_for(deps);
    std::vector<Match> matches;
    bool degraded = index == nullptr || embedder == nullptr;
    if (queries.empty() || pool.empty()) return {};

    if (!degraded) {
        try {
            std::vector<std::string> texts;
            for (const auto& q : queries) texts.push_back(q.text);
            auto vecs = embedder->embed_batch(texts);
            for (std::size_t i = 0; i < queries.size(); ++i) {
                auto found = retrieve(queries[i].dependency, vecs.at(i), pool, *index, options.k, options.floor);
                matches.insert(matches.end(), found.begin(), found.end());
            }
        } catch (const EmbeddingUnavailable& e) {
            spdlog::warn("alignment degraded for {}: {}", deps.unit_id, e.what());
            degraded = true;
            matches.clear();
        }
    }
    if (degraded) {
        for (const auto& q : queries) {
            std::size_t taken = 0;
            for (const auto& [id, entry] : pool.entries()) {
                if (taken == options.k) break;
                if (entry.category == pool::Category::Impl || to_lower(entry.name) != to_lower(q.name)) continue;
                matches.push_back(Match{q.dependency, id, 1.0});
                ++taken;
            }
        }
    }
    auto out = augment_parents(std::move(matches), pool);
    out.degraded = degraded;
    return out;
}

} // namespace c2r::align
