#pragma once

#include "c2r/c_lexer.hpp"

#include <string_view>
#include <vector>

namespace c2r::rust {

using c::Span;

enum class TokKind { Ident, Keyword, Lifetime, Literal, Punct, DocComment };

struct Token {
    TokKind kind;
    std::string_view text;
    Span span;

    bool is(TokKind k, std::string_view t) const { return kind == k && text == t; }
    bool punct(std::string_view t) const { return is(TokKind::Punct, t); }
    bool keyword(std::string_view t) const { return is(TokKind::Keyword, t); }
};

using LexError = c::LexError;

/// Tokenizes Rust source. Plain comments are dropped; outer doc comments
/// (`///`, `/** */`) and inner ones (`//!`, `/*! */`) are kept as DocComment.
/// `<<` and `>>` are always split so generic brackets can be counted.
std::vector<Token> lex(std::string_view source);

bool is_keyword(std::string_view word);

/// Strict and reserved keywords of the 2021 edition.
const std::vector<std::string_view>& keywords();

} // namespace c2r::rust
