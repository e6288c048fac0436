#include "c2r/rust_pool.hpp"

#include "c2r/rust_items.hpp"
#include "c2r/util/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace c2r::pool {

namespace {

constexpr std::string_view kNames[kCategoryCount] = {"struct", "enum", "function", "trait", "impl",
                                                     "const",  "static", "type-alias", "macro", "module"};

std::optional<Category> category_of(rust::ItemKind kind) {
    using rust::ItemKind;
    switch (kind) {
    case ItemKind::Struct: return Category::Struct;
    case ItemKind::Enum: return Category::Enum;
    case ItemKind::Function: return Category::Function;
    case ItemKind::Trait: return Category::Trait;
    case ItemKind::Impl: return Category::Impl;
    case ItemKind::Const: return Category::Const;
    case ItemKind::Static: return Category::Static;
    case ItemKind::TypeAlias: return Category::TypeAlias;
    case ItemKind::MacroRules: return Category::Macro;
    case ItemKind::Module: return Category::Module;
    default: return std::nullopt;
    }
}

std::string qualify(const std::string& prefix, const std::string& name) {
    return prefix.empty() ? name : prefix + "::" + name;
}

class PoolBuilder {
public:
    void add_file(const PoolSource& file) {
        std::vector<rust::Item> items;
        try {
            items = rust::parse_items(file.text);
        } catch (const std::exception& e) {
            spdlog::warn("pool: skipping {}: {}", file.path, e.what());
            skipped_.push_back(file.path + ": " + e.what());
            return;
        }
        add_items(file, items, module_path_for(file.path));
    }

    DependencyPool finish() {
        link_impls();
        return DependencyPool(std::move(entries_), std::move(skipped_));
    }

private:
    std::string unique_id(std::string base) {
        std::string id = base;
        for (int n = 2; taken_.count(id); ++n) id = base + "#" + std::to_string(n);
        taken_.insert(id);
        return id;
    }

    PoolEntry make(const PoolSource& file, const rust::Item& item, Category cat, std::string name, std::string qualified) {
        PoolEntry e;
        e.category = cat;
        e.name = std::move(name);
        e.qualified_name = std::move(qualified);
        e.id = unique_id(std::string(to_string(cat)) + ":" + e.qualified_name);
        e.source = file.text.substr(item.span.begin, item.span.size());
        e.file = file.path;
        e.doc = item.doc;
        return e;
    }

    void add_items(const PoolSource& file, const std::vector<rust::Item>& items, const std::string& prefix) {
        for (const auto& item : items) {
            if (item.kind == rust::ItemKind::ExternBlock) {
                add_items(file, item.children, prefix);
                continue;
            }
            auto cat = category_of(item.kind);
            if (!cat) continue;
            if (*cat == Category::Impl) {
                std::string label = item.impl_trait.empty() ? item.impl_self : item.impl_trait + " for " + item.impl_self;
                auto impl = make(file, item, Category::Impl, "impl " + label, qualify(prefix, "<" + label + ">"));
                std::size_t impl_index = entries_.size();
                impl_self_.push_back({impl_index, prefix, item.impl_self});
                std::string impl_id = impl.id;
                std::string impl_qual = impl.qualified_name;
                entries_.push_back(std::move(impl));
                for (const auto& member : item.children) {
                    auto mcat = category_of(member.kind);
                    if (!mcat) continue;
                    auto m = make(file, member, *mcat, member.name, impl_qual + "::" + member.name);
                    m.enclosing_id = impl_id;
                    entries_.push_back(std::move(m));
                }
                continue;
            }
            entries_.push_back(make(file, item, *cat, item.name, qualify(prefix, item.name)));
            if (*cat == Category::Module && !item.children.empty()) add_items(file, item.children, qualify(prefix, item.name));
        }
    }

    void link_impls() {
        for (const auto& [impl_index, prefix, self_name] : impl_self_) {
            if (self_name.empty()) continue;
            std::vector<std::size_t> candidates;
            for (std::size_t i = 0; i < entries_.size(); ++i) {
                if (is_type_like(entries_[i].category) && entries_[i].name == self_name) candidates.push_back(i);
            }
            std::optional<std::size_t> target;
            for (auto c : candidates) {
                if (entries_[c].qualified_name == qualify(prefix, self_name)) target = c;
            }
            if (!target && candidates.size() == 1) target = candidates.front();
            if (!target) continue;
            auto& impl = entries_[impl_index];
            impl.parent_id = entries_[*target].id;
            entries_[*target].impl_ids.push_back(impl.id);
            for (auto& e : entries_) {
                if (e.enclosing_id == impl.id) e.parent_id = entries_[*target].id;
            }
        }
    }

    struct ImplRef {
        std::size_t index;
        std::string prefix;
        std::string self_name;
    };

    std::vector<PoolEntry> entries_;
    std::vector<ImplRef> impl_self_;
    std::set<std::string> taken_;
    std::vector<std::string> skipped_;
};

} // namespace

std::string_view to_string(Category c) { return kNames[static_cast<std::size_t>(c)]; }

std::optional<Category> parse_category(std::string_view s) {
    for (std::size_t i = 0; i < kCategoryCount; ++i) {
        if (kNames[i] == s) return static_cast<Category>(i);
    }
    return std::nullopt;
}

bool is_type_like(Category c) {
    return c == Category::Struct || c == Category::Enum || c == Category::Trait || c == Category::TypeAlias;
}

std::string module_path_for(std::string_view rel_path) {
    std::string p(rel_path);
    if (p.starts_with("src/")) p = p.substr(4);
    if (p.ends_with(".rs")) p.resize(p.size() - 3);
    std::vector<std::string> segs;
    std::stringstream ss(p);
    for (std::string seg; std::getline(ss, seg, '/');) {
        if (!seg.empty()) segs.push_back(seg);
    }
    if (!segs.empty() && (segs.back() == "lib" || segs.back() == "main" || segs.back() == "mod")) segs.pop_back();
    std::string out;
    for (const auto& s : segs) out += (out.empty() ? "" : "::") + s;
    return out;
}

DependencyPool::DependencyPool(std::vector<PoolEntry> entries, std::vector<std::string> skipped) : skipped_(std::move(skipped)) {
    for (auto& e : entries) {
        auto id = e.id;
        if (!entries_.emplace(id, std::move(e)).second) throw ContractViolation("duplicate pool id " + id);
    }
    for (const auto& [id, e] : entries_) {
        by_category_[e.category].push_back(id);
        by_name_[e.name].push_back(id);
        if (e.qualified_name != e.name) by_name_[e.qualified_name].push_back(id);
        if (e.parent_id) {
            auto p = entries_.find(*e.parent_id);
            if (p == entries_.end() || !is_type_like(p->second.category))
                throw ContractViolation("entry " + id + " has invalid parent " + *e.parent_id);
        }
        for (const auto& impl : e.impl_ids) {
            auto it = entries_.find(impl);
            if (it == entries_.end() || it->second.parent_id != id)
                throw ContractViolation("type " + id + " lists impl " + impl + " that does not target it");
        }
    }
}

const PoolEntry* DependencyPool::find(std::string_view id) const {
    auto it = entries_.find(std::string(id));
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<const PoolEntry*> DependencyPool::lookup(std::optional<Category> category, std::optional<std::string_view> name) const {
    std::vector<const PoolEntry*> out;
    for (const auto& [id, e] : entries_) {
        if (category && e.category != *category) continue;
        if (name && e.name != *name && e.qualified_name != *name) continue;
        out.push_back(&e);
    }
    return out;
}

std::string DependencyPool::dump() const {
    std::ostringstream out;
    out << "# id\tcategory\tname\tparent\n";
    for (const auto& [id, e] : entries_) {
        out << id << '\t' << to_string(e.category) << '\t' << e.qualified_name << '\t' << e.parent_id.value_or("-") << '\n';
    }
    return out.str();
}

DependencyPool build_pool(const std::vector<PoolSource>& files) {
    std::vector<PoolSource> sorted = files;
    std::sort(sorted.begin(), sorted.end(), [](const PoolSource& a, const PoolSource& b) { return a.path < b.path; });
    PoolBuilder builder;
    for (const auto& f : sorted) builder.add_file(f);
    return builder.finish();
}

DependencyPool build_pool(const fs::path& root) {
    if (!fs::is_directory(root)) throw FatalError("pool root does not exist: " + root.string());
    std::vector<PoolSource> files;
    for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
        auto fname = it->path().filename().string();
        if (it->is_directory() && (fname == "target" || fname.starts_with("."))) {
            it.disable_recursion_pending();
            continue;
        }
        if (it->is_regular_file() && it->path().extension() == ".rs") {
            files.push_back(PoolSource{fs::relative(it->path(), root).generic_string(), read_file(it->path())});
        }
    }
    return build_pool(files);
}

} // namespace c2r::pool
