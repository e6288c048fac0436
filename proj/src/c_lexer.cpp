#include "c2r/c_lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace c2r::c {

namespace {

constexpr std::array<std::string_view, 44> kKeywords = {
    "auto",     "break",    "case",     "char",     "const",    "continue", "default",  "do",
    "double",   "else",     "enum",     "extern",   "float",    "for",      "goto",     "if",
    "inline",   "int",      "long",     "register", "restrict", "return",   "short",    "signed",
    "sizeof",   "static",   "struct",   "switch",   "typedef",  "union",    "unsigned", "void",
    "volatile", "while",    "_Bool",    "_Complex", "_Imaginary", "_Alignas", "_Alignof", "_Atomic",
    "_Noreturn", "_Static_assert", "_Thread_local", "_Generic"};

// Longest first so maximal munch works with a linear scan.
constexpr std::array<std::string_view, 24> kMultiPunct = {
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&",  "||",  "*=",  "/=", "%=", "+=", "-=", "&=", "^=", "|=", "##", "::"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

} // namespace

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    const std::size_t n = src.size();
    bool line_start = true; // only whitespace seen since the last newline

    auto push = [&](TokKind kind, std::size_t b, std::size_t e) {
        tokens.push_back(Token{kind, src.substr(b, e - b), Span{b, e}});
    };
    // b: token start (may include an encoding prefix), q: position of the quote
    auto lex_quoted = [&](std::size_t b, std::size_t q) {
        char quote = src[q];
        i = q + 1;
        while (i < n && src[i] != quote) {
            if (src[i] == '\\') ++i;
            else if (src[i] == '\n') throw LexError("unterminated literal", b);
            ++i;
        }
        if (i >= n) throw LexError("unterminated literal", b);
        ++i;
        push(quote == '"' ? TokKind::String : TokKind::Char, b, i);
    };

    while (i < n) {
        char c = src[i];
        if (c == '\n') {
            line_start = true;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') {
                if (src[i] == '\\' && i + 1 < n && src[i + 1] == '\n') ++i;
                ++i;
            }
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            auto close = src.find("*/", i + 2);
            if (close == std::string_view::npos) throw LexError("unterminated block comment", i);
            if (src.substr(i, close - i).find('\n') != std::string_view::npos) line_start = true;
            i = close + 2;
            continue;
        }
        if (c == '#' && line_start) {
            std::size_t b = i;
            while (i < n && src[i] != '\n') {
                if (src[i] == '\\' && i + 1 < n && (src[i + 1] == '\n' || (src[i + 1] == '\r' && i + 2 < n && src[i + 2] == '\n'))) {
                    i += (src[i + 1] == '\r') ? 3 : 2;
                    continue;
                }
                if (src[i] == '/' && i + 1 < n && src[i + 1] == '*') {
                    auto close = src.find("*/", i + 2);
                    if (close == std::string_view::npos) throw LexError("unterminated block comment", i);
                    i = close + 2;
                    continue;
                }
                if (src[i] == '/' && i + 1 < n && src[i + 1] == '/') {
                    while (i < n && src[i] != '\n') ++i;
                    break;
                }
                ++i;
            }
            std::size_t e = i;
            while (e > b && std::isspace(static_cast<unsigned char>(src[e - 1]))) --e;
            push(TokKind::Directive, b, e);
            continue;
        }
        line_start = false;

        if (ident_start(c)) {
            std::size_t b = i;
            while (i < n && ident_char(src[i])) ++i;
            auto word = src.substr(b, i - b);
            bool prefixed_literal = i < n && (src[i] == '"' || src[i] == '\'') &&
                                    (word == "L" || word == "u" || word == "U" || word == "u8");
            if (prefixed_literal) {
                lex_quoted(b, i);
            } else {
                push(is_keyword(word) ? TokKind::Keyword : TokKind::Identifier, b, i);
            }
            continue;
        }
        if (c == '"' || c == '\'') {
            lex_quoted(i, i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t b = i;
            while (i < n) {
                char d = src[i];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '.' || d == '_') {
                    ++i;
                } else if ((d == '+' || d == '-') && (src[i - 1] == 'e' || src[i - 1] == 'E' || src[i - 1] == 'p' || src[i - 1] == 'P')) {
                    ++i;
                } else {
                    break;
                }
            }
            push(TokKind::Number, b, i);
            continue;
        }
        std::size_t len = 1;
        for (auto p : kMultiPunct) {
            if (src.substr(i, p.size()) == p) {
                len = p.size();
                break;
            }
        }
        push(TokKind::Punct, i, i + len);
        i += len;
    }
    return tokens;
}

} // namespace c2r::c
