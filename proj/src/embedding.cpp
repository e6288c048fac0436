#include "c2r/embedding.hpp"

#include "c2r/util/http.hpp"
#include "c2r/util/text.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <thread>

namespace c2r::align {

EmbeddingVector Embedder::embed(const std::string& text) {
    auto out = embed_batch({text});
    return std::move(out.at(0));
}

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw ContractViolation("embedding dimension must be positive");
}

std::vector<std::string> HashingEmbedder::tokens(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        auto c = static_cast<unsigned char>(text[i]);
        if (!std::isalnum(c) && c != '_') {
            ++i;
            continue;
        }
        std::size_t b = i;
        while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
        auto word = to_lower(text.substr(b, i - b));
        if (word.find('_') != std::string::npos) {
            std::size_t p = 0;
            while (p <= word.size()) {
                auto q = word.find('_', p);
                if (q == std::string::npos) q = word.size();
                if (q > p && q - p < word.size()) out.push_back(word.substr(p, q - p));
                p = q + 1;
            }
        }
        if (word.find_first_not_of('_') != std::string::npos) out.push_back(std::move(word));
    }
    return out;
}

std::size_t HashingEmbedder::bucket(std::string_view token) const { return fnv1a(token) % dim_; }

std::vector<EmbeddingVector> HashingEmbedder::embed_batch(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        EmbeddingVector v;
        v.values.assign(dim_, 0.0);
        for (const auto& tok : tokens(text)) v.values[bucket(tok)] += 1.0;
        v.empty_text = norm(v) == 0.0;
        normalize(v);
        out.push_back(std::move(v));
    }
    return out;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderOptions options) : options_(std::move(options)) {
    if (options_.url.empty()) throw FatalError("remote embedding provider needs a url");
    if (options_.batch_size == 0) options_.batch_size = 1;
}

std::vector<EmbeddingVector> RemoteEmbedder::request(const std::vector<std::string>& texts) {
    nlohmann::json body = {{"input", texts}};
    if (!options_.model.empty()) body["model"] = options_.model;
    std::map<std::string, std::string> headers;
    if (!options_.token.empty()) headers["Authorization"] = "Bearer " + options_.token;

    std::string last_error;
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(options_.backoff * attempt);
        auto res = post_json(options_.url, body.dump(), headers, options_.timeout);
        if (!res.ok()) {
            last_error = res.status ? "HTTP " + std::to_string(res.status) : res.error;
            if (!res.transient()) break;
            continue;
        }
        try {
            auto j = nlohmann::json::parse(res.body);
            std::vector<EmbeddingVector> out(texts.size());
            const auto& data = j.at("data");
            if (data.size() != texts.size()) throw std::runtime_error("vector count mismatch");
            for (std::size_t i = 0; i < data.size(); ++i) {
                std::size_t idx = data[i].value("index", i);
                auto& v = out.at(idx);
                v.values = data[i].at("embedding").get<std::vector<double>>();
                if (dim_ == 0) dim_ = v.values.size();
                if (v.values.size() != dim_) throw std::runtime_error("inconsistent embedding dimension");
                v.empty_text = texts[idx].empty();
                if (v.empty_text) v.values.assign(dim_, 0.0);
                normalize(v);
            }
            return out;
        } catch (const std::exception& e) {
            last_error = std::string("bad embedding response: ") + e.what();
        }
    }
    throw EmbeddingUnavailable("embedding provider unavailable: " + last_error);
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t b = 0; b < texts.size(); b += options_.batch_size) {
        auto e = std::min(texts.size(), b + options_.batch_size);
        auto part = request(std::vector<std::string>(texts.begin() + b, texts.begin() + e));
        for (auto& v : part) out.push_back(std::move(v));
    }
    return out;
}

double norm(const EmbeddingVector& v) {
    double s = 0.0;
    for (double x : v.values) s += x * x;
    return std::sqrt(s);
}

void normalize(EmbeddingVector& v) {
    double n = norm(v);
    if (n == 0.0) return;
    for (double& x : v.values) x /= n;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.values.size() != b.values.size()) throw ContractViolation("cosine of vectors with different dimensions");
    double na = norm(a);
    double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

} // namespace c2r::align
