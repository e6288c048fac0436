#pragma once

#include "c2r/c_lexer.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace c2r::c {

/// One top-level C function definition.
/// Invariant: `source` is exactly the file bytes at `span`.
struct FunctionUnit {
    std::string id;        // "<file>::<name>"
    std::string name;
    std::string file;      // repo-relative, '/'-separated
    std::string source;
    std::string signature; // text before the body, trimmed
    Span span;
    Span body;             // the braces, as offsets into the file
    bool is_static = false;

    bool operator==(const FunctionUnit&) const = default;
};

/// A function prototype without a body (header declarations, forward decls).
struct Declaration {
    std::string name;
    std::string file;
    std::string text;
    Span span;

    bool operator==(const Declaration&) const = default;
};

enum class DefKind { Global, Record, Macro };

/// Repo-level non-function definition a function body can depend on.
struct Definition {
    DefKind kind;
    std::string name;               // primary name: variable, tag or typedef, macro
    std::string file;
    std::string text;
    Span span;
    std::vector<std::string> tags;  // struct/union/enum tags, matched after the keyword
    std::vector<std::string> names; // plain identifiers: variables, typedef names, enumerators, macro name
    bool is_extern = false;         // extern declaration rather than a definition

    bool operator==(const Definition&) const = default;
};

struct SourceFile {
    std::string path;
    std::size_t size = 0;
    std::vector<std::string> includes; // include targets without delimiters

    bool operator==(const SourceFile&) const = default;
};

struct SkippedFile {
    std::string path;
    std::string reason;

    bool operator==(const SkippedFile&) const = default;
};

/// Everything parsed out of one file.
struct FileModel {
    SourceFile file;
    std::vector<FunctionUnit> units;
    std::vector<Declaration> declarations;
    std::vector<Definition> definitions;
};

struct ParseOptions {
    std::vector<std::string> extensions{".c", ".h"};
    std::size_t jobs = 1;
};

/// Immutable after construction; safe to share across threads.
class RepoModel {
public:
    RepoModel() = default;
    RepoModel(std::filesystem::path root, std::vector<FileModel> files, std::vector<SkippedFile> skipped);

    const std::filesystem::path& root() const { return root_; }
    const std::vector<SourceFile>& files() const { return files_; }
    const std::vector<FunctionUnit>& units() const { return units_; }
    const std::vector<Declaration>& declarations() const { return declarations_; }
    const std::vector<Definition>& definitions() const { return definitions_; }
    const std::vector<SkippedFile>& skipped() const { return skipped_; }

    const FunctionUnit* find_unit(std::string_view id) const;
    const SourceFile* find_file(std::string_view path) const;
    /// Indices into units() of every definition with this name.
    std::vector<std::size_t> units_named(std::string_view name) const;
    bool has_declaration(std::string_view name) const;

    bool operator==(const RepoModel& other) const;

private:
    std::filesystem::path root_;
    std::vector<SourceFile> files_;
    std::vector<FunctionUnit> units_;
    std::vector<Declaration> declarations_;
    std::vector<Definition> definitions_;
    std::vector<SkippedFile> skipped_;
    std::map<std::string, std::size_t, std::less<>> unit_index_;
    std::map<std::string, std::vector<std::size_t>, std::less<>> by_name_;
};

/// Parses one file's text. Throws LexError or ParseError when the file cannot be structured.
FileModel parse_c_source(const std::string& rel_path, std::string_view text);

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Walks `root` for C sources and parses each one. Files that fail to parse are
/// recorded in skipped(). Throws FatalError when root is missing or nothing parses.
RepoModel parse_c_repo(const std::filesystem::path& root, const ParseOptions& options = {});

} // namespace c2r::c
