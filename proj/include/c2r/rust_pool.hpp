#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace c2r::pool {

/// The fixed ten item categories of the target-side pool.
enum class Category { Struct, Enum, Function, Trait, Impl, Const, Static, TypeAlias, Macro, Module };

inline constexpr std::size_t kCategoryCount = 10;

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view s);
bool is_type_like(Category c);

struct PoolEntry {
    std::string id;                       // "<category>:<qualified name>", unique
    Category category;
    std::string name;                     // bare symbol; impl blocks use "impl Type" / "impl Trait for Type"
    std::string qualified_name;           // module path flattened: a::b::f
    std::string source;                   // verbatim item text
    std::string file;                     // path relative to the pool root
    std::string doc;                      // outer doc comment, if any
    std::optional<std::string> parent_id; // owning type for impl blocks and their members
    std::optional<std::string> enclosing_id; // impl block containing a member
    std::vector<std::string> impl_ids;    // type entries: impl blocks targeting this type

    bool operator==(const PoolEntry&) const = default;
};

/// Categorized, immutable index over the target codebase.
class DependencyPool {
public:
    DependencyPool() = default;
    /// Builds the indexes. Throws ContractViolation when links are inconsistent.
    explicit DependencyPool(std::vector<PoolEntry> entries, std::vector<std::string> skipped = {});

    const std::map<std::string, PoolEntry>& entries() const { return entries_; }
    const std::map<Category, std::vector<std::string>>& by_category() const { return by_category_; }
    const std::map<std::string, std::vector<std::string>>& by_name() const { return by_name_; }
    const std::vector<std::string>& skipped() const { return skipped_; }

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const PoolEntry* find(std::string_view id) const;

    /// Entries matching every given filter, ordered by id. A name filter matches
    /// either the bare name or the qualified name.
    std::vector<const PoolEntry*> lookup(std::optional<Category> category = std::nullopt,
                                         std::optional<std::string_view> name = std::nullopt) const;

    /// One tab-separated line per entry: id, category, name, parent.
    std::string dump() const;

private:
    std::map<std::string, PoolEntry> entries_;
    std::map<Category, std::vector<std::string>> by_category_;
    std::map<std::string, std::vector<std::string>> by_name_;
    std::vector<std::string> skipped_;
};

struct PoolSource {
    std::string path; // relative, '/'-separated
    std::string text;
};

/// Builds a pool from in-memory files (paths decide module prefixes).
DependencyPool build_pool(const std::vector<PoolSource>& files);

/// Indexes every .rs file under root; unparseable files are skipped with a warning.
/// An empty directory yields an empty pool. Throws FatalError if root is missing.
DependencyPool build_pool(const std::filesystem::path& root);

/// Module path implied by a file location: src/a/b.rs -> a::b, src/a/mod.rs -> a, src/lib.rs -> "".
std::string module_path_for(std::string_view rel_path);

} // namespace c2r::pool
