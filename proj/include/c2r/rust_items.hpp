#pragma once

#include "c2r/rust_lexer.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace c2r::rust {

enum class ItemKind {
    Struct,
    Enum,
    Function,
    Trait,
    Impl,
    Const,
    Static,
    TypeAlias,
    MacroRules,
    Module,
    Use,
    ExternCrate,
    ExternBlock,
    MacroCall,
};

/// One syntactic item. Spans are byte offsets into the parsed buffer.
struct Item {
    ItemKind kind;
    std::string name;              // empty for impl blocks, use, extern blocks
    Span span;                     // doc comments and attributes through the closing brace/semicolon
    Span header;                   // first qualifier/keyword up to (not including) the body
    std::optional<Span> body;      // the braces, when present
    std::string doc;               // outer doc-comment text, markers stripped
    bool is_unsafe = false;
    std::string impl_self;         // impl blocks: last path segment of the implementing type
    std::string impl_trait;        // impl blocks: trait name for `impl Trait for Type`
    std::vector<Item> children;    // impl/trait/inline-mod/extern-block contents
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses the top-level items of a Rust source file, recursing into impl,
/// trait, inline module and extern blocks. Throws LexError or ParseError.
std::vector<Item> parse_items(std::string_view source);

/// Partner index of every bracket token ((), [], {}); npos elsewhere. Throws ParseError on mismatch.
std::vector<std::size_t> match_brackets(const std::vector<Token>& toks);

} // namespace c2r::rust
