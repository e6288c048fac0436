#include "c2r/llm_gateway.hpp"

#include "c2r/tokens.hpp"
#include "c2r/util/http.hpp"
#include "c2r/util/text.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <thread>

using nlohmann::json;

namespace c2r::llm {

namespace {

constexpr std::array<const char*, 5> kTagNames = {"TRANSLATE", "DETECT", "REPAIR", "BRIDGE", "CONSISTENCY"};

bool unit_matches(const std::string& wanted, const std::string& unit_id) {
    if (wanted == unit_id) return true;
    std::size_t p = 0;
    while (p <= unit_id.size()) {
        auto q = unit_id.find('+', p);
        if (q == std::string::npos) q = unit_id.size();
        if (unit_id.compare(p, q - p, wanted) == 0 && q - p == wanted.size()) return true;
        p = q + 1;
    }
    return false;
}

} // namespace

std::string tag_literal(TaskTag tag) { return std::string("[") + kTagNames[static_cast<std::size_t>(tag)] + "]"; }

std::optional<TaskTag> parse_tag(std::string_view s) {
    std::string up;
    for (char c : trim(s)) {
        if (c != '[' && c != ']') up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    for (std::size_t i = 0; i < kTagNames.size(); ++i) {
        if (up == kTagNames[i]) return static_cast<TaskTag>(i);
    }
    return std::nullopt;
}

std::string CompletionRequest::serialized() const { return tag_literal(tag) + "\n" + prompt; }

// ---- mock ----

MockBackend::MockBackend(std::vector<ScriptRecord> records) : records_(std::move(records)) {}

std::vector<ScriptRecord> MockBackend::parse_script(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw FatalError(std::string("mock script is not valid JSON: ") + e.what());
    }
    if (j.is_object()) j = j.value("records", json::array());
    if (!j.is_array()) throw FatalError("mock script must be a JSON array of records");
    std::vector<ScriptRecord> out;
    for (const auto& r : j) {
        ScriptRecord rec;
        auto tag = parse_tag(r.value("tag", ""));
        if (!tag) throw FatalError("mock script record has an unknown tag: " + r.dump());
        rec.tag = *tag;
        if (r.contains("unit")) rec.unit = r.at("unit").get<std::string>();
        if (r.contains("ordinal")) rec.ordinal = r.at("ordinal").get<std::size_t>();
        if (r.contains("match")) rec.match = r.at("match").get<std::string>();
        if (r.contains("absent")) rec.absent = r.at("absent").get<std::string>();
        rec.fail = r.value("fail", false);
        rec.response = r.value("response", "");
        if (!rec.fail && !r.contains("response")) throw FatalError("mock script record without response: " + r.dump());
        out.push_back(std::move(rec));
    }
    return out;
}

MockBackend MockBackend::from_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw FatalError("mock script not found: " + path.string());
    return MockBackend(parse_script(read_file(path)));
}

Completion MockBackend::complete(const CompletionRequest& request) {
    std::size_t ordinal;
    {
        std::lock_guard lock(mu_);
        ordinal = ++ordinals_[{request.unit_id, request.tag}];
        history_.push_back(request);
    }
    auto text = request.serialized();
    for (const auto& r : records_) {
        if (r.tag != request.tag) continue;
        if (r.unit && !unit_matches(*r.unit, request.unit_id)) continue;
        if (r.ordinal && *r.ordinal != ordinal) continue;
        if (r.match && text.find(*r.match) == std::string::npos) continue;
        if (r.absent && text.find(*r.absent) != std::string::npos) continue;
        if (r.fail) throw TransientError("scripted failure for " + request.unit_id);
        Completion c;
        c.text = r.response;
        c.finish_reason = "stop";
        c.usage = {estimate_tokens(text), estimate_tokens(r.response), true};
        return c;
    }
    throw BackendUnavailable("mock script has no reply for " + tag_literal(request.tag) + " " + request.unit_id +
                             " call #" + std::to_string(ordinal));
}

std::vector<CompletionRequest> MockBackend::history() const {
    std::lock_guard lock(mu_);
    return history_;
}

// ---- http ----

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
    if (options_.url.empty()) throw FatalError("remote backend needs an endpoint url");
}

std::string HttpBackend::request_body(const CompletionRequest& request, const std::string& model) {
    json body = {
        {"messages", json::array({{{"role", "system"}, {"content", request.system}},
                                  {{"role", "user"}, {"content", request.serialized()}}})},
        {"temperature", request.params.temperature},
        {"top_p", request.params.top_p},
        {"max_tokens", request.params.max_tokens},
        {"stream", false},
    };
    if (!model.empty()) body["model"] = model;
    return body.dump();
}

Completion HttpBackend::parse_response(const std::string& body) {
    try {
        auto j = json::parse(body);
        const auto& choice = j.at("choices").at(0);
        Completion c;
        c.text = choice.at("message").at("content").get<std::string>();
        c.finish_reason = choice.value("finish_reason", "");
        if (j.contains("usage") && j["usage"].is_object()) {
            c.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::size_t{0});
            c.usage.output_tokens = j["usage"].value("completion_tokens", std::size_t{0});
        } else {
            c.usage.estimated = true;
        }
        return c;
    } catch (const json::exception& e) {
        throw BackendUnavailable(std::string("malformed completion response: ") + e.what());
    }
}

Completion HttpBackend::complete(const CompletionRequest& request) {
    std::map<std::string, std::string> headers;
    if (!options_.token.empty()) headers["Authorization"] = "Bearer " + options_.token;
    auto res = post_json(options_.url, request_body(request, options_.model), headers, options_.timeout);
    if (!res.ok()) {
        std::string what = res.status ? "HTTP " + std::to_string(res.status) : "transport error: " + res.error;
        if (res.transient()) throw TransientError(what);
        throw BackendUnavailable(what);
    }
    auto c = parse_response(res.body);
    if (c.usage.estimated) {
        c.usage.prompt_tokens = estimate_tokens(request.system) + estimate_tokens(request.serialized());
        c.usage.output_tokens = estimate_tokens(c.text);
    }
    return c;
}

// ---- gateway ----

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(options),
      slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, options.max_in_flight))) {
    if (!backend_) throw ContractViolation("gateway needs a backend");
    if (options_.retries < 0) throw ContractViolation("retry budget must be non-negative");
}

void Gateway::set_request_hook(Hook hook) {
    std::lock_guard lock(hook_mu_);
    hook_ = std::move(hook);
}

std::size_t Gateway::calls(TaskTag tag) const { return per_tag_[static_cast<std::size_t>(tag)].load(); }

std::string Gateway::system_prompt(TaskTag tag) {
    switch (tag) {
    case TaskTag::Translate:
        return "You translate C code into safe, idiomatic Rust. Reply with one fenced rust code block.";
    case TaskTag::Detect:
        return "You find syntax and type errors in Rust code. List each error on its own line.";
    case TaskTag::Repair:
        return "You repair Rust code so that it compiles and matches the original C behavior. Reply with the "
               "complete corrected code in one fenced rust code block.";
    case TaskTag::Bridge:
        return "You summarize what a C function does and what its Rust counterpart must provide. Reply with a "
               "short docstring only.";
    case TaskTag::Consistency:
        return "You compare a C function with its Rust translation. Reply CONSISTENT if they behave the same, "
               "otherwise one line per discrepancy, each starting with MISMATCH:";
    }
    return {};
}

Completion Gateway::complete(TaskTag tag, const std::string& unit_id, const std::string& prompt) {
    CompletionRequest r;
    r.tag = tag;
    r.unit_id = unit_id;
    r.prompt = prompt;
    r.params = options_.params;
    return complete(std::move(r));
}

Completion Gateway::complete(CompletionRequest request) {
    if (trim(request.prompt).empty()) throw ContractViolation("completion prompt must not be empty");
    if (request.system.empty()) request.system = system_prompt(request.tag);
    ++calls_;
    ++per_tag_[static_cast<std::size_t>(request.tag)];

    slots_.acquire();
    struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
    } release{slots_};

    auto delay = options_.backoff;
    for (int attempt = 0;; ++attempt) {
        {
            std::lock_guard lock(hook_mu_);
            if (hook_) hook_(request);
        }
        ++attempts_;
        auto start = std::chrono::steady_clock::now();
        try {
            auto c = backend_->complete(request);
            c.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
            return c;
        } catch (const TransientError& e) {
            if (attempt >= options_.retries)
                throw BackendUnavailable("backend unavailable after " + std::to_string(attempt + 1) + " attempts: " + e.what());
            spdlog::debug("transient backend failure for {} ({}), retrying", request.unit_id, e.what());
            std::this_thread::sleep_for(delay);
            delay = std::min(delay * 2, options_.max_backoff);
        }
    }
}

// ---- extraction ----

ExtractedCode extract_code_block(std::string_view completion) {
    if (trim(completion).empty()) throw ExtractionError("empty completion");
    auto open = completion.find("```");
    if (open != std::string_view::npos) {
        auto line_end = completion.find('\n', open);
        if (line_end != std::string_view::npos) {
            auto body_begin = line_end + 1;
            std::size_t close = body_begin;
            while (true) {
                close = completion.find("```", close);
                if (close == std::string_view::npos) break;
                if (close == body_begin || completion[close - 1] == '\n') break;
                close += 3;
            }
            auto body = close == std::string_view::npos ? completion.substr(body_begin)
                                                        : completion.substr(body_begin, close - body_begin);
            auto code = std::string(trim(body));
            if (code.empty()) throw ExtractionError("empty fenced code block");
            return {code, true};
        }
    }
    return {std::string(trim(completion)), false};
}

} // namespace c2r::llm
