#include "c2r/diagnostics.hpp"

#include "c2r/util/text.hpp"

#include <json.hpp>

#include <algorithm>

using nlohmann::json;

namespace c2r::diag {

std::string_view to_string(Severity s) {
    switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Note: return "note";
    case Severity::Help: return "help";
    case Severity::Other: return "other";
    }
    return "other";
}

Severity parse_severity(std::string_view level) {
    if (level == "error" || level.starts_with("error:")) return Severity::Error;
    if (level == "warning") return Severity::Warning;
    if (level == "note" || level == "failure-note") return Severity::Note;
    if (level == "help") return Severity::Help;
    return Severity::Other;
}

bool CompileReport::has_code(std::string_view code) const {
    return std::any_of(diagnostics.begin(), diagnostics.end(), [&](const Diagnostic& d) { return d.code == code; });
}

std::vector<Diagnostic> parse_rustc_json(std::string_view output) {
    std::vector<Diagnostic> out;
    for (const auto& raw : split_lines(output)) {
        auto line = trim(raw);
        if (line.empty() || line.front() != '{') continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("level") || !j.contains("message")) continue;
        if (j.contains("$message_type") && j["$message_type"] != "diagnostic") continue;

        Diagnostic d;
        d.message = j["message"].get<std::string>();
        d.severity = parse_severity(j["level"].get<std::string>());
        if (d.severity == Severity::Error && d.message.starts_with("aborting due to")) continue;
        if (j.contains("code") && j["code"].is_object()) d.code = j["code"].value("code", "");
        if (j.contains("rendered") && j["rendered"].is_string()) d.rendered = j["rendered"].get<std::string>();
        if (j.contains("spans") && j["spans"].is_array()) {
            for (const auto& s : j["spans"]) {
                if (!s.value("is_primary", false)) continue;
                d.location = Location{s.value("file_name", ""), s.value("line_start", std::size_t{0}),
                                      s.value("column_start", std::size_t{0})};
                if (s.contains("text") && s["text"].is_array() && !s["text"].empty())
                    d.source_line = s["text"][0].value("text", "");
                break;
            }
        }
        out.push_back(std::move(d));
    }
    return out;
}

std::size_t count_errors(const std::vector<Diagnostic>& diagnostics) {
    return static_cast<std::size_t>(std::count_if(diagnostics.begin(), diagnostics.end(),
                                                  [](const Diagnostic& d) { return d.severity == Severity::Error; }));
}

CompileReport make_report(std::vector<Diagnostic> diagnostics, int exit_code, bool timed_out,
                          std::chrono::milliseconds elapsed) {
    CompileReport r;
    r.diagnostics = std::move(diagnostics);
    r.exit_code = exit_code;
    r.timed_out = timed_out;
    r.elapsed = elapsed;
    r.n_err = count_errors(r.diagnostics);
    if (!timed_out && exit_code != 0 && r.n_err == 0) {
        // the compiler failed without telling us why; still an error
        Diagnostic d;
        d.code = "TOOLCHAIN";
        d.message = "compiler exited with status " + std::to_string(exit_code) + " without diagnostics";
        r.diagnostics.push_back(std::move(d));
        r.n_err = 1;
    }
    r.success = !timed_out && exit_code == 0 && r.n_err == 0;
    return r;
}

std::string format_for_prompt(const CompileReport& report, std::size_t limit) {
    std::vector<const Diagnostic*> picked;
    for (const auto& d : report.diagnostics)
        if (d.severity == Severity::Error) picked.push_back(&d);
    for (const auto& d : report.diagnostics)
        if (d.severity == Severity::Warning) picked.push_back(&d);
    std::string out;
    std::size_t shown = 0;
    for (const auto* d : picked) {
        if (shown == limit) break;
        ++shown;
        out += std::string(to_string(d->severity));
        if (!d->code.empty()) out += "[" + d->code + "]";
        out += ": " + d->message + "\n";
        if (d->location) out += "  --> line " + std::to_string(d->location->line) + ":" + std::to_string(d->location->column) + "\n";
        if (!d->source_line.empty()) out += "   | " + d->source_line + "\n";
    }
    if (picked.size() > shown) out += "(" + std::to_string(picked.size() - shown) + " more not shown)\n";
    return out;
}

} // namespace c2r::diag
