#pragma once

#include <chrono>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace c2r::align {

struct EmbeddingVector {
    std::vector<double> values;
    bool empty_text = false; // zero vector produced for empty input

    bool operator==(const EmbeddingVector&) const = default;
};

/// Thrown by providers that could not be reached within their retry budget.
class EmbeddingUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::size_t dimension() const = 0;
    virtual std::string name() const = 0;
    /// One normalized vector per input, in order.
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;

    EmbeddingVector embed(const std::string& text);
};

/// Deterministic bag-of-words provider: every token is hashed into one of
/// `dim` buckets and the count vector is L2-normalized.
class HashingEmbedder final : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dim = 256);

    std::size_t dimension() const override { return dim_; }
    std::string name() const override { return "hashing"; }
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

    /// Tokens counted by the provider: lowercased identifier/number runs, plus
    /// the pieces of snake_case runs. Punctuation is ignored.
    static std::vector<std::string> tokens(std::string_view text);
    std::size_t bucket(std::string_view token) const;

private:
    std::size_t dim_;
};

struct RemoteEmbedderOptions {
    std::string url;       // full endpoint, e.g. http://host:8080/v1/embeddings
    std::string model;
    std::string token;     // bearer token, optional
    std::size_t batch_size = 32;
    int retries = 2;       // extra attempts after the first
    std::chrono::milliseconds timeout{std::chrono::seconds(30)};
    std::chrono::milliseconds backoff{std::chrono::milliseconds(200)};
};

/// Embeddings over HTTP. Request: {"model": m, "input": [..]}; response:
/// {"data": [{"index": i, "embedding": [..]}, ..]}.
class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(RemoteEmbedderOptions options);

    std::size_t dimension() const override { return dim_; }
    std::string name() const override { return "remote"; }
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

private:
    std::vector<EmbeddingVector> request(const std::vector<std::string>& texts);

    RemoteEmbedderOptions options_;
    std::size_t dim_ = 0;
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);
double norm(const EmbeddingVector& v);
/// In-place L2 normalization; zero vectors stay zero.
void normalize(EmbeddingVector& v);

} // namespace c2r::align
