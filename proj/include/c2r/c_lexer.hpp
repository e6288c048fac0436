#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace c2r::c {

enum class TokKind { Identifier, Keyword, Number, String, Char, Punct, Directive };

/// Byte range [begin, end) into the lexed buffer.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool operator==(const Span&) const = default;
};

struct Token {
    TokKind kind;
    std::string_view text; // views the lexed buffer
    Span span;

    bool is(TokKind k, std::string_view t) const { return kind == k && text == t; }
    bool punct(std::string_view t) const { return is(TokKind::Punct, t); }
};

class LexError : public std::runtime_error {
public:
    LexError(const std::string& what, std::size_t offset)
        : std::runtime_error(what), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Tokenizes C source without preprocessing. Comments are dropped; every
/// preprocessor line (with backslash continuations) becomes one Directive token.
/// Throws LexError on unterminated comments, strings, or character literals.
std::vector<Token> lex(std::string_view source);

bool is_keyword(std::string_view word);

} // namespace c2r::c
