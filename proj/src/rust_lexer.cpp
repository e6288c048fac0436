#include "c2r/rust_lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace c2r::rust {

namespace {

const std::vector<std::string_view> kKeywords = {
    "as",    "break",    "const",   "continue", "crate",  "else",    "enum",   "extern", "false",  "fn",
    "for",   "if",       "impl",    "in",       "let",    "loop",    "match",  "mod",    "move",   "mut",
    "pub",   "ref",      "return",  "self",     "Self",   "static",  "struct", "super",  "trait",  "true",
    "type",  "unsafe",   "use",     "where",    "while",  "async",   "await",  "dyn",    "abstract", "become",
    "box",   "do",       "final",   "macro",    "override", "priv",  "typeof", "unsized", "virtual", "yield",
    "try"};

constexpr std::array<std::string_view, 20> kMultiPunct = {
    "..=", "...", "::", "->", "=>", "==", "!=", "<=", ">=", "&&", "||",
    "+=",  "-=",  "*=", "/=", "%=", "^=", "&=", "|=", ".."};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || (static_cast<unsigned char>(c) & 0x80); }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || (static_cast<unsigned char>(c) & 0x80); }

std::size_t utf8_len(unsigned char c) {
    if (c < 0x80) return 1;
    if ((c >> 5) == 0x6) return 2;
    if ((c >> 4) == 0xe) return 3;
    if ((c >> 3) == 0x1e) return 4;
    return 1;
}

} // namespace

const std::vector<std::string_view>& keywords() { return kKeywords; }

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> toks;
    const std::size_t n = src.size();
    std::size_t i = 0;
    auto push = [&](TokKind k, std::size_t b, std::size_t e) { toks.push_back(Token{k, src.substr(b, e - b), Span{b, e}}); };

    auto quoted = [&](std::size_t b, std::size_t q) {
        // q points at the opening quote; escapes allowed
        std::size_t j = q + 1;
        while (j < n && src[j] != '"') {
            if (src[j] == '\\') ++j;
            ++j;
        }
        if (j >= n) throw LexError("unterminated string literal", b);
        i = j + 1;
        push(TokKind::Literal, b, i);
    };
    auto raw = [&](std::size_t b, std::size_t r) {
        // r points just past the 'r'
        std::size_t hashes = 0;
        std::size_t j = r;
        while (j < n && src[j] == '#') ++hashes, ++j;
        if (j >= n || src[j] != '"') return false;
        std::string closing = "\"" + std::string(hashes, '#');
        auto end = src.find(closing, j + 1);
        if (end == std::string_view::npos) throw LexError("unterminated raw string", b);
        i = end + closing.size();
        push(TokKind::Literal, b, i);
        return true;
    };

    while (i < n) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            std::size_t b = i;
            while (i < n && src[i] != '\n') ++i;
            auto body = src.substr(b, i - b);
            bool outer_doc = body.starts_with("///") && !body.starts_with("////");
            bool inner_doc = body.starts_with("//!");
            if (outer_doc || inner_doc) push(TokKind::DocComment, b, i);
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            std::size_t b = i;
            std::size_t depth = 0;
            while (i < n) {
                if (src[i] == '/' && i + 1 < n && src[i + 1] == '*') {
                    ++depth;
                    i += 2;
                } else if (src[i] == '*' && i + 1 < n && src[i + 1] == '/') {
                    i += 2;
                    if (--depth == 0) break;
                } else {
                    ++i;
                }
            }
            if (depth != 0) throw LexError("unterminated block comment", b);
            auto body = src.substr(b, i - b);
            bool doc = (body.starts_with("/**") && !body.starts_with("/***") && body != "/**/") || body.starts_with("/*!");
            if (doc) push(TokKind::DocComment, b, i);
            continue;
        }
        // string-ish prefixes: b"", br"", r"", r#""#, c"", b''
        if (c == 'r' && i + 1 < n && (src[i + 1] == '"' || src[i + 1] == '#')) {
            if (raw(i, i + 1)) continue;
            if (src[i + 1] == '#' && i + 2 < n && ident_start(src[i + 2])) {
                // raw identifier r#name
                std::size_t b = i;
                i += 2;
                while (i < n && ident_char(src[i])) ++i;
                push(TokKind::Ident, b, i);
                continue;
            }
        }
        if ((c == 'b' || c == 'c') && i + 1 < n) {
            if (src[i + 1] == '"') {
                quoted(i, i + 1);
                continue;
            }
            if (src[i + 1] == 'r' && i + 2 < n && (src[i + 2] == '"' || src[i + 2] == '#')) {
                if (raw(i, i + 2)) continue;
            }
            if (c == 'b' && src[i + 1] == '\'') {
                std::size_t j = i + 2;
                if (j < n && src[j] == '\\') j += 2;
                else ++j;
                while (j < n && src[j] != '\'') ++j;
                if (j >= n) throw LexError("unterminated byte literal", i);
                std::size_t b = i;
                i = j + 1;
                push(TokKind::Literal, b, i);
                continue;
            }
        }
        if (ident_start(c)) {
            std::size_t b = i;
            while (i < n && ident_char(src[i])) ++i;
            auto word = src.substr(b, i - b);
            push(is_keyword(word) ? TokKind::Keyword : TokKind::Ident, b, i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t b = i;
            while (i < n) {
                char d = src[i];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '_') {
                    ++i;
                } else if (d == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1]))) {
                    ++i;
                } else if ((d == '+' || d == '-') && (src[i - 1] == 'e' || src[i - 1] == 'E') &&
                           !(src[b] == '0' && b + 1 < n && (src[b + 1] == 'x' || src[b + 1] == 'X'))) {
                    ++i;
                } else {
                    break;
                }
            }
            push(TokKind::Literal, b, i);
            continue;
        }
        if (c == '"') {
            quoted(i, i);
            continue;
        }
        if (c == '\'') {
            std::size_t b = i;
            if (i + 1 < n && src[i + 1] == '\\') {
                std::size_t j = i + 2;
                while (j < n && src[j] != '\'' && src[j] != '\n') ++j;
                if (j >= n || src[j] != '\'') throw LexError("unterminated char literal", b);
                i = j + 1;
                push(TokKind::Literal, b, i);
                continue;
            }
            if (i + 1 < n) {
                std::size_t len = utf8_len(static_cast<unsigned char>(src[i + 1]));
                if (i + 1 + len < n && src[i + 1 + len] == '\'') {
                    i = i + 2 + len;
                    push(TokKind::Literal, b, i);
                    continue;
                }
                if (ident_start(src[i + 1])) {
                    i += 1;
                    while (i < n && ident_char(src[i])) ++i;
                    push(TokKind::Lifetime, b, i);
                    continue;
                }
            }
            throw LexError("stray quote", b);
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
    return toks;
}

} // namespace c2r::rust
