#pragma once

#include "c2r/call_graph.hpp"
#include "c2r/embedding.hpp"
#include "c2r/rust_pool.hpp"

#include <map>
#include <string>
#include <vector>

namespace c2r::align {

/// Write-once vectors for every pool entry, keyed by entry id.
class VectorIndex {
public:
    VectorIndex() = default;
    /// Embeds every entry of `pool`. Propagates EmbeddingUnavailable.
    VectorIndex(const pool::DependencyPool& pool, Embedder& embedder);

    const std::map<std::string, EmbeddingVector>& vectors() const { return vectors_; }
    const EmbeddingVector* find(const std::string& id) const;
    std::size_t size() const { return vectors_.size(); }

    /// Retrieval text of a pool entry: name, newline, source.
    static std::string entry_text(const pool::PoolEntry& entry);

private:
    std::map<std::string, EmbeddingVector> vectors_;
};

struct Match {
    std::string dependency; // "<kind>:<name>" of the C-side dependency
    std::string entry_id;
    double score = 0.0;

    bool operator==(const Match&) const = default;
};

/// Top-k entries by cosine similarity to `query`, ties by entry id; entries
/// scoring below `floor` are dropped. An empty pool yields no matches.
std::vector<Match> retrieve(const std::string& dependency, const EmbeddingVector& query,
                            const pool::DependencyPool& pool, const VectorIndex& index,
                            std::size_t k, double floor = -1.0);

struct AlignedContext {
    std::vector<Match> matches;        // grouped by dependency, scores descending within a group
    std::vector<std::string> augmented; // parent entry ids, first-seen order, no duplicates
    bool degraded = false;             // embedding provider failed; name matching was used

    bool operator==(const AlignedContext&) const = default;
};

/// Adds the parent of every matched entry that has one.
AlignedContext augment_parents(std::vector<Match> matches, const pool::DependencyPool& pool);
/// Idempotent re-augmentation of an existing context.
AlignedContext augment_parents(AlignedContext context, const pool::DependencyPool& pool);

struct AlignOptions {
    std::size_t k = 1;
    double floor = 0.35;
};

/// One retrieval query per C-side dependency (records, globals, macros, external callees).
struct DependencyQuery {
    std::string dependency; // "<kind>:<name>"
    std::string name;
    std::string text;       // name + newline + snippet
};

std::vector<DependencyQuery> queries_for(const c::DependencySet& deps);

/// Aligns every dependency of a unit to the pool. When the embedder is
/// unavailable, falls back to exact bare-name matches and flags the result degraded.
AlignedContext align_dependencies(const c::DependencySet& deps, const pool::DependencyPool& pool,
                                  const VectorIndex* index, Embedder* embedder, const AlignOptions& options);

} // namespace c2r::align
