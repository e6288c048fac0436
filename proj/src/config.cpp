#include "c2r/config.hpp"

#include "c2r/util/text.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdlib>
#include <functional>
#include <sstream>

namespace fs = std::filesystem;

namespace c2r {

namespace {

std::size_t parse_count(const std::string& key, const std::string& v) {
    std::size_t out = 0;
    auto s = trim(v);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || p != s.data() + s.size()) throw FatalError("config " + key + ": not a non-negative integer: " + v);
    return out;
}

double parse_real(const std::string& key, const std::string& v) {
    double out = 0;
    auto s = trim(v);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || p != s.data() + s.size()) throw FatalError("config " + key + ": not a number: " + v);
    return out;
}

bool parse_flag(const std::string& key, const std::string& v) {
    auto s = to_lower(trim(v));
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw FatalError("config " + key + ": not a boolean: " + v);
}

std::string real_text(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

} // namespace

ConfigValues read_config_file(const fs::path& path) {
    if (!fs::exists(path)) throw FatalError("config file not found: " + path.string());
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw FatalError(std::string("cannot parse config: ") + e.what());
    }
    ConfigValues out;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            out[section] = body.data();
            continue;
        }
        for (const auto& [key, value] : body) out[section + "." + key] = value.data();
    }
    return out;
}

void apply_values(RunConfig& c, const ConfigValues& values, const fs::path& base) {
    auto path_of = [&](const std::string& v) {
        fs::path p(v);
        return (base.empty() || p.is_absolute()) ? p : base / p;
    };
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"run.c_root", [&](auto&, auto& v) { c.c_root = path_of(v); }},
        {"run.pool_root", [&](auto&, auto& v) { c.pool_root = v.empty() ? std::nullopt : std::optional(path_of(v)); }},
        {"run.output_dir", [&](auto&, auto& v) { c.output_dir = path_of(v); }},
        {"run.jobs", [&](auto& k, auto& v) { c.jobs = parse_count(k, v); }},
        {"run.max_levels", [&](auto& k, auto& v) { c.max_levels = parse_count(k, v); }},
        {"backend.kind",
         [&](auto& k, auto& v) {
             if (v == "mock") c.backend = BackendKind::Mock;
             else if (v == "remote") c.backend = BackendKind::Remote;
             else throw FatalError("config " + k + ": expected mock or remote, got " + v);
         }},
        {"backend.mock_script", [&](auto&, auto& v) { c.mock_script = path_of(v); }},
        {"backend.endpoint", [&](auto&, auto& v) { c.endpoint = v; }},
        {"backend.model", [&](auto&, auto& v) { c.model = v; }},
        {"backend.embedding", [&](auto&, auto& v) { c.embedding = v; }},
        {"budgets.compile_iters", [&](auto& k, auto& v) { c.compile_iters = parse_count(k, v); }},
        {"budgets.consistency_iters", [&](auto& k, auto& v) { c.consistency_iters = parse_count(k, v); }},
        {"budgets.candidates", [&](auto& k, auto& v) { c.candidates = parse_count(k, v); }},
        {"context.similarity_floor", [&](auto& k, auto& v) { c.similarity_floor = parse_real(k, v); }},
        {"context.top_k", [&](auto& k, auto& v) { c.top_k = parse_count(k, v); }},
        {"context.verbatim_threshold", [&](auto& k, auto& v) { c.verbatim_threshold = parse_count(k, v); }},
        {"context.budget", [&](auto& k, auto& v) { c.context_budget = parse_count(k, v); }},
        {"context.plain_deps", [&](auto& k, auto& v) { c.plain_deps = parse_flag(k, v); }},
        {"context.templates_dir", [&](auto&, auto& v) { c.templates_dir = v.empty() ? std::nullopt : std::optional(path_of(v)); }},
        {"scoring.alpha", [&](auto& k, auto& v) { c.alpha = parse_real(k, v); }},
        {"scoring.beta", [&](auto& k, auto& v) { c.beta = parse_real(k, v); }},
        {"toolchain.rustc", [&](auto&, auto& v) { c.rustc = v; }},
        {"toolchain.cargo", [&](auto&, auto& v) { c.cargo = v; }},
        {"toolchain.timeout", [&](auto& k, auto& v) { c.compile_timeout = std::chrono::seconds(parse_count(k, v)); }},
        {"toolchain.keep_artifacts", [&](auto& k, auto& v) { c.keep_artifacts = parse_flag(k, v); }},
    };
    for (const auto& [key, value] : values) {
        auto it = setters.find(key);
        if (it == setters.end()) throw FatalError("unknown config key: " + key);
        it->second(key, value);
    }
}

void apply_environment(RunConfig& c) {
    auto env = [](const char* name) -> std::string {
        const char* v = std::getenv(name);
        return v ? v : "";
    };
    if (c.endpoint.empty()) c.endpoint = env("C2R_ENDPOINT");
    if (c.token.empty()) c.token = env("C2R_TOKEN");
    if (c.model.empty()) c.model = env("C2R_MODEL");
}

void validate(const RunConfig& c) {
    if (c.c_root.empty()) throw FatalError("c_root is required");
    if (c.output_dir.empty()) throw FatalError("output_dir is required");
    if (c.candidates < 1) throw FatalError("candidates must be at least 1");
    if (c.top_k < 1) throw FatalError("top_k must be at least 1");
    if (c.jobs < 1) throw FatalError("jobs must be at least 1");
    if (c.alpha < 0 || c.beta < 0) throw FatalError("reward weights must be non-negative");
    if (c.alpha == 0 && c.beta == 0) throw FatalError("reward weights alpha and beta must not both be 0");
    if (c.similarity_floor < -1.0 || c.similarity_floor > 1.0) throw FatalError("similarity_floor must lie in [-1, 1]");
    if (c.context_budget == 0) throw FatalError("context budget must be positive");
    if (c.backend == BackendKind::Mock && c.mock_script.empty()) throw FatalError("mock backend needs a mock_script");
    if (c.backend == BackendKind::Remote && c.endpoint.empty())
        throw FatalError("remote backend needs an endpoint (C2R_ENDPOINT or backend.endpoint)");
    if (c.max_levels && *c.max_levels == 0) throw FatalError("max_levels must be positive");
}

std::string snapshot(const RunConfig& c) {
    std::ostringstream out;
    auto flag = [](bool b) { return b ? "true" : "false"; };
    out << "[run]\n"
        << "c_root = " << c.c_root.string() << "\n"
        << "pool_root = " << (c.pool_root ? c.pool_root->string() : "") << "\n"
        << "output_dir = " << c.output_dir.string() << "\n"
        << "jobs = " << c.jobs << "\n";
    if (c.max_levels) out << "max_levels = " << *c.max_levels << "\n";
    out << "\n[backend]\n"
        << "kind = " << (c.backend == BackendKind::Mock ? "mock" : "remote") << "\n"
        << "mock_script = " << c.mock_script.string() << "\n"
        << "endpoint = " << c.endpoint << "\n"
        << "model = " << c.model << "\n"
        << "embedding = " << c.embedding << "\n"
        << "\n[budgets]\n"
        << "compile_iters = " << c.compile_iters << "\n"
        << "consistency_iters = " << c.consistency_iters << "\n"
        << "candidates = " << c.candidates << "\n"
        << "\n[context]\n"
        << "similarity_floor = " << real_text(c.similarity_floor) << "\n"
        << "top_k = " << c.top_k << "\n"
        << "verbatim_threshold = " << c.verbatim_threshold << "\n"
        << "budget = " << c.context_budget << "\n"
        << "plain_deps = " << flag(c.plain_deps) << "\n"
        << "templates_dir = " << (c.templates_dir ? c.templates_dir->string() : "") << "\n"
        << "\n[scoring]\n"
        << "alpha = " << real_text(c.alpha) << "\n"
        << "beta = " << real_text(c.beta) << "\n"
        << "\n[toolchain]\n"
        << "rustc = " << c.rustc << "\n"
        << "cargo = " << c.cargo << "\n"
        << "timeout = " << c.compile_timeout.count() << "\n"
        << "keep_artifacts = " << flag(c.keep_artifacts) << "\n";
    return out.str();
}

} // namespace c2r
