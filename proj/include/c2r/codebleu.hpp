#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace c2r::score {

/// Component values and the weighted total. A component whose reference side
/// has nothing to match (no bracket subtrees, no data-flow edges) is undefined;
/// the total then renormalizes the remaining weights.
struct CodeBleu {
    double ngram = 0.0;
    double weighted_ngram = 0.0;
    double syntax = 0.0;
    double dataflow = 0.0;
    bool syntax_defined = true;
    bool dataflow_defined = true;
    double total = 0.0;
};

inline constexpr double kCodeBleuWeight = 0.25;

/// CodeBLEU of `candidate` against `reference` (Rust sources):
///  - n-gram: BLEU-4 over lexer tokens with brevity penalty; unigram precision
///    is raw, n >= 2 precisions are add-one smoothed.
///  - weighted n-gram: as above, but the unigram precision weights keyword
///    tokens 1.0 and all other tokens 0.2.
///  - syntax: share of the reference's bracket subtrees (identifiers and
///    literals abstracted) found in the candidate, with clipped counts.
///  - data-flow: share of the reference's def-use edges (let bindings and
///    assignments; variables renamed by first appearance) found in the candidate.
/// Empty input scores 0.
CodeBleu codebleu(std::string_view candidate, std::string_view reference);

namespace detail {

struct Tok {
    enum Kind { Ident, Keyword, Literal, Punct, Lifetime } kind;
    std::string text;
};

std::vector<Tok> tokenize(std::string_view code);
double bleu(const std::vector<Tok>& cand, const std::vector<Tok>& ref, bool keyword_weighted);
/// Abstracted bracket subtrees; empty when brackets do not balance.
std::vector<std::string> subtrees(const std::vector<Tok>& toks, bool* balanced = nullptr);
/// Normalized data-flow edges "target<-src,src".
std::vector<std::string> dataflow_edges(const std::vector<Tok>& toks);

} // namespace detail

} // namespace c2r::score
