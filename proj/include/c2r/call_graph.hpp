#pragma once

#include "c2r/c_analyzer.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace c2r {

/// Plain adjacency-list digraph over nodes 0..n-1.
struct Digraph {
    std::vector<std::vector<std::size_t>> succ;

    explicit Digraph(std::size_t n = 0) : succ(n) {}
    std::size_t size() const { return succ.size(); }
    void add_edge(std::size_t from, std::size_t to) { succ[from].push_back(to); }
};

/// Strongly connected components and the acyclic graph between them.
/// Components are numbered by their smallest member node.
struct Condensation {
    std::vector<std::size_t> component_of;            // node -> component
    std::vector<std::vector<std::size_t>> members;    // component -> sorted nodes
    std::vector<std::vector<std::size_t>> succ;       // component DAG, sorted, no self-loops
};

Condensation condense(const Digraph& g);

/// level(c) = 0 for components without successors, else 1 + max level of successors.
std::vector<std::size_t> component_levels(const Condensation& c);

} // namespace c2r

namespace c2r::c {

/// Name-resolved call graph over a RepoModel's units. Immutable once built.
struct CallGraph {
    std::vector<std::string> nodes;                     // unit ids, in RepoModel order
    std::vector<std::pair<std::string, std::string>> edges; // caller -> callee, sorted
    Digraph graph;
    Condensation condensation;
    std::map<std::string, std::vector<std::string>> externals; // unit -> called names with no definition
    std::map<std::string, std::vector<std::string>> notes;     // unit -> skipped indirect calls, ambiguity

    std::size_t index_of(std::string_view id) const;
    std::vector<std::string> callees(std::string_view id) const;
    /// Ids of the units sharing a strongly connected component with `id` (including itself).
    std::vector<std::string> component_members(std::string_view id) const;
};

CallGraph build_call_graph(const RepoModel& repo);

struct Snippet {
    std::string name;
    std::string file;
    std::string text;

    bool operator==(const Snippet&) const = default;
};

struct DependencySet {
    std::string unit_id;
    std::vector<std::string> callees;    // unit ids
    std::vector<std::string> headers;
    std::vector<Snippet> globals;
    std::vector<Snippet> records;
    std::vector<Snippet> macros;
    std::vector<std::string> externals;  // called names with no definition in the repo
    std::vector<std::string> ambiguous;  // names with several candidate definitions

    bool operator==(const DependencySet&) const = default;
};

/// Throws FatalError for an unknown unit id.
DependencySet extract_dependency_set(std::string_view unit_id, const RepoModel& repo, const CallGraph& graph);

struct TranslationOrder {
    std::vector<std::vector<std::string>> levels;  // level 0 first; ids sorted within a level
    std::map<std::string, std::size_t> level_of;
};

TranslationOrder topological_order(const CallGraph& graph);

/// Debug dump: one tab-separated record per node (id, level, component, callees, externals).
std::string dump_graph(const CallGraph& graph, const TranslationOrder& order);

} // namespace c2r::c
