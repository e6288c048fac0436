#include "c2r/rust_items.hpp"

#include "c2r/util/text.hpp"

namespace c2r::rust {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

bool opener(const Token& t) { return t.punct("(") || t.punct("[") || t.punct("{"); }
bool closer(const Token& t) { return t.punct(")") || t.punct("]") || t.punct("}"); }

std::string strip_doc(std::string_view raw) {
    std::string out;
    for (auto& line : split_lines(raw)) {
        std::string_view l = trim(line);
        if (l.starts_with("///") || l.starts_with("//!")) l.remove_prefix(3);
        else if (l.starts_with("/**") || l.starts_with("/*!")) l.remove_prefix(3);
        if (l.ends_with("*/")) l.remove_suffix(2);
        if (l.starts_with("*")) l.remove_prefix(1);
        l = trim(l);
        if (!out.empty()) out += '\n';
        out += l;
    }
    return std::string(trim(out));
}

class ItemParser {
public:
    explicit ItemParser(std::string_view src) : src_(src), toks_(lex(src)), partner_(match_brackets(toks_)) {}

    std::vector<Item> run() { return items(0, toks_.size()); }

private:
    [[noreturn]] void fail(std::size_t k, const std::string& what) const {
        std::size_t off = k < toks_.size() ? toks_[k].span.begin : src_.size();
        throw ParseError(what + " at byte " + std::to_string(off));
    }

    const Token& at(std::size_t k, std::size_t end) const {
        if (k >= end) fail(k, "unexpected end of input");
        return toks_[k];
    }

    // First ';' or '{' at depth 0 starting from k. With `braces` false, braces are skipped as groups.
    std::size_t find_terminator(std::size_t k, std::size_t end, bool stop_at_brace) const {
        while (k < end) {
            const Token& t = toks_[k];
            if (t.punct(";")) return k;
            if (t.punct("{") && stop_at_brace) return k;
            if (opener(t)) {
                k = partner_[k] + 1;
                continue;
            }
            ++k;
        }
        fail(k, "missing ';' or '{'");
    }

    std::string ident_after(std::size_t k, std::size_t end) const {
        const Token& t = at(k, end);
        if (t.kind != TokKind::Ident && !t.keyword("self") && !t.keyword("Self")) fail(k, "expected identifier");
        return std::string(t.text);
    }

    // Last identifier at angle depth 0 in [b, e): the type name of a path like a::b::Foo<T>.
    std::string last_path_ident(std::size_t b, std::size_t e) const {
        std::string name;
        int angle = 0;
        for (std::size_t k = b; k < e; ++k) {
            const Token& t = toks_[k];
            if (t.punct("<")) ++angle;
            else if (t.punct(">")) --angle;
            else if (angle == 0 && t.kind == TokKind::Ident && t.text != "dyn") name = std::string(t.text);
            else if (angle == 0 && opener(t)) k = partner_[k];
        }
        return name;
    }

    void parse_impl_header(std::size_t b, std::size_t brace, Item& item) const {
        std::size_t k = b;
        if (k < brace && toks_[k].punct("<")) {
            int angle = 0;
            for (; k < brace; ++k) {
                if (toks_[k].punct("<")) ++angle;
                else if (toks_[k].punct(">") && --angle == 0) {
                    ++k;
                    break;
                }
            }
        }
        std::size_t stop = brace;
        std::size_t for_pos = npos;
        int angle = 0;
        for (std::size_t j = k; j < brace; ++j) {
            const Token& t = toks_[j];
            if (t.punct("<")) ++angle;
            else if (t.punct(">")) --angle;
            else if (angle == 0 && t.keyword("where")) {
                stop = j;
                break;
            } else if (angle == 0 && t.keyword("for") && !(j + 1 < brace && toks_[j + 1].punct("<") && j == k)) {
                for_pos = j;
            }
        }
        if (for_pos != npos) {
            item.impl_trait = last_path_ident(k, for_pos);
            item.impl_self = last_path_ident(for_pos + 1, stop);
        } else {
            item.impl_self = last_path_ident(k, stop);
        }
    }

    std::vector<Item> items(std::size_t k, std::size_t end) {
        std::vector<Item> out;
        while (k < end) {
            std::string doc;
            std::size_t start = npos;
            // doc comments and attributes
            for (;;) {
                if (k >= end) return out;
                const Token& t = toks_[k];
                if (t.kind == TokKind::DocComment) {
                    bool inner = t.text.starts_with("//!") || t.text.starts_with("/*!");
                    if (!inner) {
                        doc += (doc.empty() ? "" : "\n") + strip_doc(t.text);
                        if (start == npos) start = k;
                    }
                    ++k;
                    continue;
                }
                if (t.punct("#")) {
                    std::size_t j = k + 1;
                    bool inner = j < end && toks_[j].punct("!");
                    if (inner) ++j;
                    if (j >= end || !toks_[j].punct("[")) fail(k, "malformed attribute");
                    if (!inner && start == npos) start = k;
                    k = partner_[j] + 1;
                    continue;
                }
                if (t.punct(";")) {
                    ++k;
                    continue;
                }
                break;
            }
            if (start == npos) start = k;
            std::size_t head = k;

            Item item{};
            if (toks_[k].keyword("pub")) {
                ++k;
                if (k < end && toks_[k].punct("(")) k = partner_[k] + 1;
            }
            // qualifiers
            for (;;) {
                const Token& t = at(k, end);
                if (t.is(TokKind::Ident, "default") && k + 1 < end && (toks_[k + 1].keyword("fn") || toks_[k + 1].keyword("unsafe") ||
                                                                     toks_[k + 1].keyword("const") || toks_[k + 1].keyword("type") ||
                                                                     toks_[k + 1].keyword("async"))) {
                    ++k;
                } else if (t.keyword("unsafe")) {
                    item.is_unsafe = true;
                    ++k;
                } else if (t.keyword("async")) {
                    ++k;
                } else if (t.keyword("const") && k + 1 < end &&
                           (toks_[k + 1].keyword("fn") || toks_[k + 1].keyword("unsafe") || toks_[k + 1].keyword("async") ||
                            toks_[k + 1].keyword("extern"))) {
                    ++k;
                } else if (t.keyword("extern") && k + 1 < end && toks_[k + 1].kind == TokKind::Literal &&
                           k + 2 < end && (toks_[k + 2].keyword("fn") || toks_[k + 2].keyword("unsafe"))) {
                    k += 2;
                } else if (t.keyword("extern") && k + 1 < end && toks_[k + 1].keyword("fn")) {
                    ++k;
                } else if (t.is(TokKind::Ident, "auto") && k + 1 < end && toks_[k + 1].keyword("trait")) {
                    ++k;
                } else {
                    break;
                }
            }

            const Token& kw = at(k, end);
            std::size_t last = npos;
            if (kw.keyword("fn")) {
                item.kind = ItemKind::Function;
                item.name = ident_after(k + 1, end);
                std::size_t term = find_terminator(k + 2, end, true);
                if (toks_[term].punct("{")) {
                    item.body = Span{toks_[term].span.begin, toks_[partner_[term]].span.end};
                    last = partner_[term];
                } else {
                    last = term;
                }
                item.header = Span{toks_[head].span.begin, toks_[term].span.begin};
            } else if (kw.keyword("struct") || kw.is(TokKind::Ident, "union")) {
                item.kind = ItemKind::Struct;
                item.name = ident_after(k + 1, end);
                std::size_t term = find_terminator(k + 2, end, true);
                if (toks_[term].punct("{")) {
                    item.body = Span{toks_[term].span.begin, toks_[partner_[term]].span.end};
                    last = partner_[term];
                } else {
                    last = term;
                }
                item.header = Span{toks_[head].span.begin, toks_[term].span.begin};
            } else if (kw.keyword("enum")) {
                item.kind = ItemKind::Enum;
                item.name = ident_after(k + 1, end);
                std::size_t term = find_terminator(k + 2, end, true);
                if (!toks_[term].punct("{")) fail(term, "enum without body");
                item.body = Span{toks_[term].span.begin, toks_[partner_[term]].span.end};
                item.header = Span{toks_[head].span.begin, toks_[term].span.begin};
                last = partner_[term];
            } else if (kw.keyword("trait")) {
                item.kind = ItemKind::Trait;
                item.name = ident_after(k + 1, end);
                std::size_t term = find_terminator(k + 2, end, true);
                item.header = Span{toks_[head].span.begin, toks_[term].span.begin};
                if (toks_[term].punct("{")) {
                    item.body = Span{toks_[term].span.begin, toks_[partner_[term]].span.end};
                    item.children = items(term + 1, partner_[term]);
                    last = partner_[term];
                } else {
                    last = term; // trait alias
                }
            } else if (kw.keyword("impl")) {
                item.kind = ItemKind::Impl;
                std::size_t term = find_terminator(k + 1, end, true);
                if (!toks_[term].punct("{")) fail(term, "impl without body");
                parse_impl_header(k + 1, term, item);
                item.header = Span{toks_[head].span.begin, toks_[term].span.begin};
                item.body = Span{toks_[term].span.begin, toks_[partner_[term]].span.end};
                item.children = items(term + 1, partner_[term]);
                last = partner_[term];
            } else if (kw.keyword("const") || kw.keyword("static") || kw.keyword("type")) {
                item.kind = kw.keyword("const") ? ItemKind::Const : kw.keyword("static") ? ItemKind::Static : ItemKind::TypeAlias;
                std::size_t n = k + 1;
                if (n < end && toks_[n].keyword("mut")) ++n;
                item.name = ident_after(n, end);
                std::size_t term = find_terminator(n + 1, end, false);
                item.header = Span{toks_[head].span.begin, toks_[term].span.end};
                last = term;
            } else if (kw.keyword("mod")) {
                item.kind = ItemKind::Module;
                item.name = ident_after(k + 1, end);
                std::size_t term = find_terminator(k + 2, end, true);
                item.header = Span{toks_[head].span.begin, toks_[term].span.begin};
                if (toks_[term].punct("{")) {
                    item.body = Span{toks_[term].span.begin, toks_[partner_[term]].span.end};
                    item.children = items(term + 1, partner_[term]);
                    last = partner_[term];
                } else {
                    last = term;
                }
            } else if (kw.is(TokKind::Ident, "macro_rules") && k + 1 < end && toks_[k + 1].punct("!")) {
                item.kind = ItemKind::MacroRules;
                item.name = ident_after(k + 2, end);
                std::size_t g = k + 3;
                if (!opener(at(g, end))) fail(g, "macro_rules without body");
                item.header = Span{toks_[head].span.begin, toks_[g].span.begin};
                item.body = Span{toks_[g].span.begin, toks_[partner_[g]].span.end};
                last = partner_[g];
                if (!toks_[g].punct("{") && last + 1 < end && toks_[last + 1].punct(";")) ++last;
            } else if (kw.keyword("use")) {
                item.kind = ItemKind::Use;
                last = find_terminator(k + 1, end, false);
                item.header = Span{toks_[head].span.begin, toks_[last].span.end};
            } else if (kw.keyword("extern") && k + 1 < end && toks_[k + 1].keyword("crate")) {
                item.kind = ItemKind::ExternCrate;
                item.name = ident_after(k + 2, end);
                last = find_terminator(k + 2, end, false);
                item.header = Span{toks_[head].span.begin, toks_[last].span.end};
            } else if (kw.keyword("extern")) {
                item.kind = ItemKind::ExternBlock;
                std::size_t g = k + 1;
                if (g < end && toks_[g].kind == TokKind::Literal) ++g;
                if (!at(g, end).punct("{")) fail(g, "expected extern block");
                item.header = Span{toks_[head].span.begin, toks_[g].span.begin};
                item.body = Span{toks_[g].span.begin, toks_[partner_[g]].span.end};
                item.children = items(g + 1, partner_[g]);
                last = partner_[g];
            } else if (kw.kind == TokKind::Ident || kw.punct("::")) {
                // macro invocation: path ! group [;]
                std::size_t j = k;
                while (j < end && (toks_[j].kind == TokKind::Ident || toks_[j].punct("::"))) ++j;
                if (j + 1 >= end || !toks_[j].punct("!") || !opener(toks_[j + 1])) fail(k, "unexpected token '" + std::string(kw.text) + "'");
                item.kind = ItemKind::MacroCall;
                item.name = std::string(toks_[j - 1].text);
                item.header = Span{toks_[head].span.begin, toks_[j + 1].span.begin};
                last = partner_[j + 1];
                if (!toks_[j + 1].punct("{") && last + 1 < end && toks_[last + 1].punct(";")) ++last;
            } else {
                fail(k, "unexpected token '" + std::string(kw.text) + "'");
            }

            item.doc = doc;
            item.span = Span{toks_[start].span.begin, toks_[last].span.end};
            out.push_back(std::move(item));
            k = last + 1;
        }
        return out;
    }

    std::string_view src_;
    std::vector<Token> toks_;
    std::vector<std::size_t> partner_;
};

} // namespace

std::vector<std::size_t> match_brackets(const std::vector<Token>& toks) {
    std::vector<std::size_t> partner(toks.size(), npos);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const Token& t = toks[i];
        if (opener(t)) {
            stack.push_back(i);
        } else if (closer(t)) {
            if (stack.empty()) throw ParseError("unbalanced '" + std::string(t.text) + "' at byte " + std::to_string(t.span.begin));
            const Token& o = toks[stack.back()];
            bool ok = (o.text == "(" && t.text == ")") || (o.text == "[" && t.text == "]") || (o.text == "{" && t.text == "}");
            if (!ok) throw ParseError("mismatched '" + std::string(t.text) + "' at byte " + std::to_string(t.span.begin));
            partner[stack.back()] = i;
            partner[i] = stack.back();
            stack.pop_back();
        }
    }
    if (!stack.empty()) throw ParseError("unclosed '" + std::string(toks[stack.back()].text) + "'");
    return partner;
}

std::vector<Item> parse_items(std::string_view source) { return ItemParser(source).run(); }

} // namespace c2r::rust
