#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <vector>

namespace c2r::llm {

enum class TaskTag { Translate, Detect, Repair, Bridge, Consistency };

/// "[TRANSLATE]", "[DETECT]", "[REPAIR]", "[BRIDGE]", "[CONSISTENCY]".
std::string tag_literal(TaskTag tag);
/// Accepts the literal with or without brackets, any case.
std::optional<TaskTag> parse_tag(std::string_view s);

struct DecodingParams {
    double temperature = 0.0;
    double top_p = 1.0;
    int max_tokens = 4096;

    bool operator==(const DecodingParams&) const = default;
};

struct CompletionRequest {
    TaskTag tag = TaskTag::Translate;
    std::string unit_id;  // routing key for scripted backends and logs
    std::string system;   // task instruction
    std::string prompt;   // body, without the tag line
    DecodingParams params;

    /// The tag literal on its own line, then the prompt body.
    std::string serialized() const;
};

struct Usage {
    std::size_t prompt_tokens = 0;
    std::size_t output_tokens = 0;
    bool estimated = false;
};

struct Completion {
    std::string text;
    std::string finish_reason;
    Usage usage;
    std::chrono::milliseconds latency{0};
};

/// The backend could not produce a completion (after retries, when raised by the gateway).
class BackendUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A failure worth retrying (transport errors, 429, 5xx).
class TransientError : public BackendUnavailable {
public:
    using BackendUnavailable::BackendUnavailable;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual Completion complete(const CompletionRequest& request) = 0;
    virtual std::string name() const = 0;
    virtual bool uses_network() const = 0;
};

/// One scripted reply. A record applies when every set field matches; the
/// first applicable record in file order wins.
struct ScriptRecord {
    TaskTag tag = TaskTag::Translate;
    std::optional<std::string> unit;    // exact unit id, or one member of a '+'-joined batch id
    std::optional<std::size_t> ordinal; // 1-based call count for (unit, tag)
    std::optional<std::string> match;   // substring of the serialized prompt
    std::optional<std::string> absent;  // substring that must not occur in the prompt
    std::string response;
    bool fail = false;                  // raise a transient backend failure instead of replying
};

/// Deterministic scripted backend for hermetic runs.
///
/// Script file: JSON array (or {"records": [...]}) of objects with keys
/// tag, unit, ordinal, match, absent, response, fail.
class MockBackend final : public Backend {
public:
    explicit MockBackend(std::vector<ScriptRecord> records);
    static MockBackend from_file(const std::filesystem::path& path);
    static std::vector<ScriptRecord> parse_script(std::string_view json_text);

    Completion complete(const CompletionRequest& request) override;
    std::string name() const override { return "mock"; }
    bool uses_network() const override { return false; }

    std::vector<CompletionRequest> history() const;

private:
    std::vector<ScriptRecord> records_;
    mutable std::mutex mu_;
    std::map<std::pair<std::string, TaskTag>, std::size_t> ordinals_;
    std::vector<CompletionRequest> history_;
};

struct HttpBackendOptions {
    std::string url;   // chat-completions endpoint
    std::string model;
    std::string token;
    std::chrono::milliseconds timeout{std::chrono::seconds(300)};
};

/// Chat-completion style endpoint: system message carries the task
/// instruction, a single user message carries the tagged prompt.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(HttpBackendOptions options);

    Completion complete(const CompletionRequest& request) override;
    std::string name() const override { return "remote"; }
    bool uses_network() const override { return true; }

    static std::string request_body(const CompletionRequest& request, const std::string& model);
    /// Parses a chat-completions response body. Throws BackendUnavailable on malformed input.
    static Completion parse_response(const std::string& body);

private:
    HttpBackendOptions options_;
};

struct GatewayOptions {
    int retries = 2; // extra attempts after the first, transient failures only
    std::chrono::milliseconds backoff{std::chrono::milliseconds(500)};
    std::chrono::milliseconds max_backoff{std::chrono::seconds(8)};
    std::size_t max_in_flight = 4;
    DecodingParams params;
};

/// Shareable front door to a backend: fills default decoding parameters,
/// bounds concurrency, retries transient failures, and counts calls.
class Gateway {
public:
    using Hook = std::function<void(const CompletionRequest&)>;

    Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {});

    /// Throws BackendUnavailable once the retry budget is spent.
    Completion complete(CompletionRequest request);
    /// Convenience: builds the request with the gateway's default params.
    Completion complete(TaskTag tag, const std::string& unit_id, const std::string& prompt);

    /// Called with every request before it reaches the backend (including retries).
    void set_request_hook(Hook hook);

    const Backend& backend() const { return *backend_; }
    const GatewayOptions& options() const { return options_; }
    std::size_t calls() const { return calls_.load(); }
    std::size_t calls(TaskTag tag) const;
    std::size_t backend_attempts() const { return attempts_.load(); }

    static std::string system_prompt(TaskTag tag);

private:
    std::shared_ptr<Backend> backend_;
    GatewayOptions options_;
    std::counting_semaphore<> slots_;
    std::atomic<std::size_t> calls_{0};
    std::atomic<std::size_t> attempts_{0};
    std::array<std::atomic<std::size_t>, 5> per_tag_{};
    std::mutex hook_mu_;
    Hook hook_;
};

struct ExtractedCode {
    std::string code;
    bool fenced = false; // true when a fenced block was found
};

class ExtractionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// First fenced code block of the completion, or the whole text trimmed when
/// there is none. Throws ExtractionError for empty completions.
ExtractedCode extract_code_block(std::string_view completion);

} // namespace c2r::llm
