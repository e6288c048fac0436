#include "c2r/codebleu.hpp"

#include "c2r/rust_lexer.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

namespace c2r::score {

namespace detail {

namespace {

std::vector<Tok> fallback_tokens(std::string_view code) {
    std::vector<Tok> out;
    std::size_t i = 0;
    while (i < code.size()) {
        auto c = static_cast<unsigned char>(code[i]);
        if (std::isspace(c)) {
            ++i;
        } else if (std::isalnum(c) || c == '_') {
            std::size_t b = i;
            while (i < code.size() && (std::isalnum(static_cast<unsigned char>(code[i])) || code[i] == '_')) ++i;
            auto word = std::string(code.substr(b, i - b));
            auto kind = std::isdigit(c) ? Tok::Literal : rust::is_keyword(word) ? Tok::Keyword : Tok::Ident;
            out.push_back({kind, std::move(word)});
        } else {
            out.push_back({Tok::Punct, std::string(1, code[i++])});
        }
    }
    return out;
}

bool is_open(const std::string& t) { return t == "(" || t == "[" || t == "{"; }
bool is_close(const std::string& t) { return t == ")" || t == "]" || t == "}"; }

std::map<std::vector<std::string>, std::size_t> ngrams(const std::vector<Tok>& toks, std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> out;
    if (toks.size() < n) return out;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        std::vector<std::string> g;
        for (std::size_t k = 0; k < n; ++k) g.push_back(toks[i + k].text);
        ++out[g];
    }
    return out;
}

bool is_variable(const std::vector<Tok>& toks, std::size_t i) {
    const auto& t = toks[i];
    if (t.kind != Tok::Ident || t.text.empty()) return false;
    if (std::isupper(static_cast<unsigned char>(t.text.front()))) return false;
    if (i + 1 < toks.size()) {
        const auto& n = toks[i + 1].text;
        if (n == "(" || n == "!" || n == "::") return false;
    }
    if (i > 0) {
        const auto& p = toks[i - 1].text;
        if (p == "." || p == "::" || p == "'") return false;
    }
    return true;
}

const std::set<std::string> kAssignOps = {"=", "+=", "-=", "*=", "/=", "%=", "^=", "&=", "|="};

} // namespace

std::vector<Tok> tokenize(std::string_view code) {
    try {
        std::vector<Tok> out;
        for (const auto& t : rust::lex(code)) {
            switch (t.kind) {
            case rust::TokKind::DocComment: break;
            case rust::TokKind::Ident: out.push_back({Tok::Ident, std::string(t.text)}); break;
            case rust::TokKind::Keyword: out.push_back({Tok::Keyword, std::string(t.text)}); break;
            case rust::TokKind::Literal: out.push_back({Tok::Literal, std::string(t.text)}); break;
            case rust::TokKind::Lifetime: out.push_back({Tok::Lifetime, std::string(t.text)}); break;
            case rust::TokKind::Punct: out.push_back({Tok::Punct, std::string(t.text)}); break;
            }
        }
        return out;
    } catch (const std::exception&) {
        return fallback_tokens(code);
    }
}

double bleu(const std::vector<Tok>& cand, const std::vector<Tok>& ref, bool keyword_weighted) {
    if (cand.empty() || ref.empty()) return 0.0;
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        auto cg = ngrams(cand, n);
        auto rg = ngrams(ref, n);
        double p;
        if (n == 1) {
            double num = 0.0;
            double den = 0.0;
            for (const auto& [g, count] : cg) {
                double w = 1.0;
                if (keyword_weighted) w = rust::is_keyword(g.front()) ? 1.0 : 0.2;
                auto it = rg.find(g);
                double clipped = it == rg.end() ? 0.0 : static_cast<double>(std::min(count, it->second));
                num += w * clipped;
                den += w * static_cast<double>(count);
            }
            p = den == 0.0 ? 0.0 : num / den;
            if (p == 0.0) return 0.0;
        } else {
            double matched = 0.0;
            double total = 0.0;
            for (const auto& [g, count] : cg) {
                auto it = rg.find(g);
                if (it != rg.end()) matched += static_cast<double>(std::min(count, it->second));
                total += static_cast<double>(count);
            }
            p = (matched + 1.0) / (total + 1.0);
        }
        log_sum += 0.25 * std::log(p);
    }
    double c = static_cast<double>(cand.size());
    double r = static_cast<double>(ref.size());
    double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    return bp * std::exp(log_sum);
}

std::vector<std::string> subtrees(const std::vector<Tok>& toks, bool* balanced) {
    std::vector<std::string> norm;
    for (const auto& t : toks) {
        switch (t.kind) {
        case Tok::Ident: norm.push_back("ID"); break;
        case Tok::Literal: norm.push_back("LIT"); break;
        case Tok::Lifetime: norm.push_back("LT"); break;
        default: norm.push_back(t.text); break;
        }
    }
    std::vector<std::string> out;
    std::vector<std::size_t> stack;
    auto partner = [](const std::string& close) { return close == ")" ? "(" : close == "]" ? "[" : "{"; };
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& t = toks[i].text;
        if (toks[i].kind != Tok::Punct) continue;
        if (is_open(t)) {
            stack.push_back(i);
        } else if (is_close(t)) {
            if (stack.empty() || toks[stack.back()].text != partner(t)) {
                if (balanced) *balanced = false;
                return {};
            }
            std::string s;
            for (std::size_t k = stack.back(); k <= i; ++k) s += (s.empty() ? "" : " ") + norm[k];
            out.push_back(std::move(s));
            stack.pop_back();
        }
    }
    if (!stack.empty()) {
        if (balanced) *balanced = false;
        return {};
    }
    if (balanced) *balanced = true;
    return out;
}

std::vector<std::string> dataflow_edges(const std::vector<Tok>& toks) {
    struct Edge {
        std::vector<std::string> targets;
        std::vector<std::string> sources;
    };
    std::vector<Edge> edges;
    std::set<std::size_t> consumed; // '=' tokens already handled by a binding

    auto rhs_vars = [&](std::size_t from) {
        std::vector<std::string> vars;
        int depth = 0;
        for (std::size_t k = from; k < toks.size(); ++k) {
            const auto& t = toks[k];
            if (t.kind == Tok::Punct) {
                if (is_open(t.text)) ++depth;
                else if (is_close(t.text) && --depth < 0) break;
                else if (depth == 0 && (t.text == ";" || t.text == ",")) break;
            }
            if (is_variable(toks, k) && std::find(vars.begin(), vars.end(), t.text) == vars.end()) vars.push_back(t.text);
        }
        return vars;
    };

    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (t.kind == Tok::Punct && t.text == "#" && i + 1 < toks.size() && toks[i + 1].text == "[") {
            int depth = 0;
            for (++i; i < toks.size(); ++i) {
                if (toks[i].text == "[") ++depth;
                else if (toks[i].text == "]" && --depth == 0) break;
            }
            continue;
        }
        if (t.kind == Tok::Keyword && (t.text == "let" || t.text == "const" || t.text == "static" || t.text == "type")) {
            std::vector<std::string> targets;
            std::size_t k = i + 1;
            int depth = 0;
            bool in_type = false;
            for (; k < toks.size(); ++k) {
                const auto& p = toks[k];
                if (p.kind == Tok::Punct) {
                    if (is_open(p.text)) ++depth;
                    else if (is_close(p.text)) --depth;
                    if (depth == 0 && (p.text == "=" || p.text == ";")) break;
                    if (depth == 0 && p.text == ":") in_type = true;
                }
                if (!in_type && t.text != "type" && p.kind == Tok::Ident && is_variable(toks, k)) targets.push_back(p.text);
                if (!in_type && t.text != "type" && (t.text == "const" || t.text == "static") && p.kind == Tok::Ident)
                    if (std::find(targets.begin(), targets.end(), p.text) == targets.end()) targets.push_back(p.text);
            }
            if (k < toks.size() && toks[k].text == "=") {
                consumed.insert(k);
                if (!targets.empty()) edges.push_back({targets, rhs_vars(k + 1)});
            }
            continue;
        }
        if (t.kind == Tok::Punct && kAssignOps.count(t.text) && !consumed.count(i)) {
            // statement start: walk back to ';' or an unmatched bracket
            std::size_t start = i;
            int depth = 0;
            while (start > 0) {
                const auto& p = toks[start - 1];
                if (p.kind == Tok::Punct) {
                    if (depth == 0 && (p.text == ";" || p.text == "," || p.text == "}" || is_open(p.text))) break;
                    if (is_close(p.text)) ++depth;
                    else if (is_open(p.text)) --depth;
                }
                --start;
            }
            std::string target;
            for (std::size_t k = start; k < i; ++k) {
                if (is_variable(toks, k)) {
                    target = toks[k].text;
                    break;
                }
            }
            if (target.empty()) continue;
            auto sources = rhs_vars(i + 1);
            if (t.text != "=" && std::find(sources.begin(), sources.end(), target) == sources.end())
                sources.insert(sources.begin(), target);
            edges.push_back({{target}, sources});
        }
    }

    std::map<std::string, std::string> rename;
    auto norm = [&](const std::string& v) {
        auto it = rename.find(v);
        if (it == rename.end()) it = rename.emplace(v, "var_" + std::to_string(rename.size())).first;
        return it->second;
    };
    std::vector<std::string> out;
    for (const auto& e : edges) {
        for (const auto& target : e.targets) {
            std::string s = norm(target) + "<-";
            for (std::size_t k = 0; k < e.sources.size(); ++k) s += (k ? "," : "") + norm(e.sources[k]);
            out.push_back(std::move(s));
        }
    }
    return out;
}

} // namespace detail

namespace {

double clipped_recall(const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
    std::map<std::string, std::size_t> cc;
    std::map<std::string, std::size_t> rc;
    for (const auto& s : cand) ++cc[s];
    for (const auto& s : ref) ++rc[s];
    std::size_t matched = 0;
    for (const auto& [s, n] : rc) {
        auto it = cc.find(s);
        if (it != cc.end()) matched += std::min(n, it->second);
    }
    return static_cast<double>(matched) / static_cast<double>(ref.size());
}

} // namespace

CodeBleu codebleu(std::string_view candidate, std::string_view reference) {
    CodeBleu out;
    auto cand = detail::tokenize(candidate);
    auto ref = detail::tokenize(reference);
    if (cand.empty() || ref.empty()) {
        spdlog::warn("codebleu on empty input scores 0");
        out.syntax_defined = out.dataflow_defined = false;
        return out;
    }
    out.ngram = detail::bleu(cand, ref, false);
    out.weighted_ngram = detail::bleu(cand, ref, true);

    bool ref_balanced = false;
    auto ref_trees = detail::subtrees(ref, &ref_balanced);
    out.syntax_defined = ref_balanced && !ref_trees.empty();
    if (out.syntax_defined) out.syntax = clipped_recall(detail::subtrees(cand), ref_trees);

    auto ref_edges = detail::dataflow_edges(ref);
    out.dataflow_defined = !ref_edges.empty();
    if (out.dataflow_defined) out.dataflow = clipped_recall(detail::dataflow_edges(cand), ref_edges);

    double weight = 2 * kCodeBleuWeight;
    double sum = kCodeBleuWeight * (out.ngram + out.weighted_ngram);
    if (out.syntax_defined) {
        sum += kCodeBleuWeight * out.syntax;
        weight += kCodeBleuWeight;
    }
    if (out.dataflow_defined) {
        sum += kCodeBleuWeight * out.dataflow;
        weight += kCodeBleuWeight;
    }
    out.total = sum / weight;
    return out;
}

} // namespace c2r::score
