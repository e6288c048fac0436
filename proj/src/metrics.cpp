#include "c2r/metrics.hpp"

#include "c2r/rust_items.hpp"
#include "c2r/rust_lexer.hpp"
#include "c2r/util/process.hpp"
#include "c2r/util/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace c2r::metrics {

double compute_csr(const std::vector<refine::Status>& statuses) {
    if (statuses.empty()) throw ContractViolation("CSR of an empty run");
    auto ok = std::count_if(statuses.begin(), statuses.end(), [](refine::Status s) { return s != refine::Status::Failed; });
    return 100.0 * static_cast<double>(ok) / static_cast<double>(statuses.size());
}

double compute_csr(const std::vector<refine::TranslationRecord>& records) {
    std::vector<refine::Status> s;
    for (const auto& r : records) s.push_back(r.status);
    return compute_csr(s);
}

double compute_ca(const std::vector<UnitResult>& units, std::vector<std::string>* warnings) {
    if (units.empty()) throw ContractViolation("CA of an empty run");
    std::size_t passing = 0;
    std::size_t with_tests = 0;
    for (const auto& u : units) {
        if (u.tests_passed) ++with_tests;
        if (u.status != refine::Status::Failed && u.tests_passed.value_or(false)) ++passing;
    }
    if (with_tests == 0 && warnings) warnings->push_back("no unit has tests; CA is 0 by definition");
    else if (with_tests < units.size() && warnings)
        warnings->push_back(std::to_string(units.size() - with_tests) + " unit(s) without tests count as not passing");
    return 100.0 * static_cast<double>(passing) / static_cast<double>(units.size());
}

UnsafeCount count_unsafe_lines(std::string_view source) {
    auto toks = rust::lex(source);
    std::vector<std::size_t> line_starts{0};
    for (std::size_t i = 0; i < source.size(); ++i)
        if (source[i] == '\n') line_starts.push_back(i + 1);
    auto line_of = [&](std::size_t offset) {
        return static_cast<std::size_t>(std::upper_bound(line_starts.begin(), line_starts.end(), offset) - line_starts.begin()) - 1;
    };

    std::set<std::size_t> code_lines;
    for (const auto& t : toks) {
        if (t.kind == rust::TokKind::DocComment) continue;
        // a token may span lines (raw strings); every line it touches holds code
        for (auto l = line_of(t.span.begin); l <= line_of(t.span.end - 1); ++l) code_lines.insert(l);
    }

    std::vector<rust::Token> code;
    for (const auto& t : toks)
        if (t.kind != rust::TokKind::DocComment) code.push_back(t);
    auto partner = rust::match_brackets(code);

    std::set<std::size_t> unsafe_lines;
    auto mark_inside = [&](std::size_t open) {
        auto close = partner[open];
        for (std::size_t k = open + 1; k < close; ++k) {
            for (auto l = line_of(code[k].span.begin); l <= line_of(code[k].span.end - 1); ++l) unsafe_lines.insert(l);
        }
    };
    for (std::size_t i = 0; i < code.size(); ++i) {
        if (code[i].kind != rust::TokKind::Keyword || code[i].text != "unsafe" || i + 1 >= code.size()) continue;
        const auto& next = code[i + 1];
        if (next.text == "{") {
            mark_inside(i + 1);
            continue;
        }
        // unsafe item: fn / impl / trait / extern block; function pointer types have no name after `fn`
        std::size_t k = i + 1;
        if (next.text == "extern") {
            ++k;
            if (k < code.size() && code[k].kind == rust::TokKind::Literal) ++k;
        }
        if (k >= code.size()) continue;
        bool is_fn = code[k].text == "fn" && k + 1 < code.size() && code[k + 1].kind == rust::TokKind::Ident;
        bool is_extern_block = next.text == "extern" && code[k].text == "{";
        bool is_impl_or_trait = code[k].text == "impl" || code[k].text == "trait";
        if (!is_fn && !is_extern_block && !is_impl_or_trait) continue;
        std::size_t body = k;
        while (body < code.size() && code[body].text != "{" && code[body].text != ";") {
            if (code[body].text == "(" || code[body].text == "[") body = partner[body];
            ++body;
        }
        std::size_t end_line = body < code.size() ? line_of(code[body].span.begin) : line_of(code.back().span.begin);
        for (auto l = line_of(code[i].span.begin); l <= end_line; ++l)
            if (code_lines.count(l)) unsafe_lines.insert(l);
        if (body < code.size() && code[body].text == "{" && (is_fn || is_extern_block)) mark_inside(body);
    }
    return {unsafe_lines.size(), code_lines.size()};
}

double unsafe_ratio(const std::vector<SourceText>& files, std::vector<std::string>* warnings) {
    std::size_t unsafe = 0;
    std::size_t total = 0;
    for (const auto& f : files) {
        try {
            auto c = count_unsafe_lines(f.text);
            unsafe += c.unsafe_lines;
            total += c.code_lines;
        } catch (const std::exception& e) {
            spdlog::warn("unsafe ratio: excluding {}: {}", f.path, e.what());
            if (warnings) warnings->push_back("excluded from unsafe ratio: " + f.path);
        }
    }
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(unsafe) / static_cast<double>(total);
}

namespace {

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

struct FnLocation {
    fs::path file;
    rust::Span body;
};

void find_fn(const std::vector<rust::Item>& items, const std::string& prefix, const std::string& name,
             const fs::path& file, std::vector<FnLocation>& out) {
    for (const auto& it : items) {
        if (it.kind == rust::ItemKind::Function && it.body) {
            auto qualified = prefix.empty() ? it.name : prefix + "::" + it.name;
            if (it.name == name || qualified == name) out.push_back({file, *it.body});
        }
        if (it.kind == rust::ItemKind::Module) find_fn(it.children, prefix.empty() ? it.name : prefix + "::" + it.name, name, file, out);
        if (it.kind == rust::ItemKind::Impl) find_fn(it.children, prefix.empty() ? it.impl_self : prefix + "::" + it.impl_self, name, file, out);
    }
}

// Restores a file's original bytes when it goes out of scope.
class FileRestore {
public:
    FileRestore(fs::path path, std::string original) : path_(std::move(path)), original_(std::move(original)) {}
    ~FileRestore() {
        try {
            write_file(path_, original_);
        } catch (const std::exception& e) {
            spdlog::error("failed to restore {}: {}", path_.string(), e.what());
        }
    }
    FileRestore(const FileRestore&) = delete;
    FileRestore& operator=(const FileRestore&) = delete;

private:
    fs::path path_;
    std::string original_;
};

} // namespace

CoverageResult identify_test_coverage(const fs::path& crate_root, const std::string& name, const CoverageOptions& options) {
    if (!fs::exists(crate_root / "Cargo.toml")) throw FatalError("not a cargo crate: " + crate_root.string());
    TempDir target("c2r-probe-target");
    ProcessOptions popts{crate_root, {{"CARGO_TARGET_DIR", target.path().string()}}, options.timeout};
    auto run_suite = [&] { return run_process({options.cargo, "test", "--offline", "--quiet"}, popts); };

    auto before = hash_tree(crate_root, {"target"});
    auto baseline = run_suite();
    if (baseline.spawn_failed) throw FatalError("could not run " + options.cargo);
    if (!baseline.ok()) throw ProbeRefused("baseline test suite fails; refusing to probe " + name);

    std::vector<FnLocation> found;
    std::vector<fs::path> sources;
    for (const auto& e : fs::recursive_directory_iterator(crate_root / "src"))
        if (e.is_regular_file() && e.path().extension() == ".rs") sources.push_back(e.path());
    std::sort(sources.begin(), sources.end());
    for (const auto& p : sources) {
        try {
            find_fn(rust::parse_items(read_file(p)), "", name, p, found);
        } catch (const std::exception& e) {
            spdlog::warn("coverage probe: cannot parse {}: {}", p.string(), e.what());
        }
    }
    if (found.empty()) throw FatalError("function not found in crate: " + name);
    const auto& loc = found.front();

    CoverageResult result;
    result.file = fs::relative(loc.file, crate_root).generic_string();
    {
        auto original = read_file(loc.file);
        FileRestore restore(loc.file, original);
        auto mutated = original.substr(0, loc.body.begin) + "{ panic!(\"c2r coverage probe\") }" + original.substr(loc.body.end);
        write_file(loc.file, mutated);

        auto build = run_process({options.cargo, "test", "--offline", "--quiet", "--no-run"}, popts);
        if (!build.ok()) {
            result.inconclusive = true;
            result.note = "probe build failed";
        } else {
            auto probe = run_suite();
            result.covered = !probe.ok();
            if (probe.timed_out) result.note = "probe run timed out";
        }
    }
    auto after = hash_tree(crate_root, {"target"});
    if (after != before) throw FatalError("repository changed during coverage probe of " + name);
    return result;
}

BenchmarkReport aggregate(const std::vector<BenchmarkReport>& reports, const std::string& name) {
    if (reports.empty()) throw ContractViolation("nothing to aggregate");
    if (reports.size() == 1) {
        auto out = reports.front();
        return out;
    }
    BenchmarkReport out;
    out.name = name;
    double csr = 0, ca = 0, unsafe = 0, bleu = 0;
    std::size_t bleu_units = 0;
    for (const auto& r : reports) {
        auto n = static_cast<double>(r.n_units);
        out.n_units += r.n_units;
        csr += r.csr * n;
        ca += r.ca * n;
        unsafe += r.unsafe_ratio * n;
        if (r.mean_codebleu) {
            bleu += *r.mean_codebleu * n;
            bleu_units += r.n_units;
        }
        out.per_unit.insert(out.per_unit.end(), r.per_unit.begin(), r.per_unit.end());
        for (const auto& w : r.warnings) out.warnings.push_back(r.name + ": " + w);
    }
    if (out.n_units == 0) return out;
    auto n = static_cast<double>(out.n_units);
    out.csr = csr / n;
    out.ca = ca / n;
    out.unsafe_ratio = unsafe / n;
    if (bleu_units) out.mean_codebleu = bleu / static_cast<double>(bleu_units);
    return out;
}

BenchmarkReport build_report(const std::string& name, std::vector<UnitResult> units, const std::vector<SourceText>& sources) {
    BenchmarkReport r;
    r.name = name;
    r.n_units = units.size();
    if (!units.empty()) {
        std::vector<refine::Status> statuses;
        for (const auto& u : units) statuses.push_back(u.status);
        r.csr = compute_csr(statuses);
        r.ca = compute_ca(units, &r.warnings);
        double sum = 0;
        std::size_t n = 0;
        for (const auto& u : units) {
            if (u.codebleu) {
                sum += *u.codebleu;
                ++n;
            }
        }
        if (n) r.mean_codebleu = sum / static_cast<double>(n);
    }
    r.unsafe_ratio = unsafe_ratio(sources, &r.warnings);
    r.per_unit = std::move(units);
    return r;
}

json to_json(const BenchmarkReport& r) {
    json units = json::array();
    for (const auto& u : r.per_unit) {
        json j = {{"unit", u.unit_id}, {"status", std::string(refine::to_string(u.status))}, {"n_err", u.n_err}};
        j["codebleu"] = u.codebleu ? json(round3(*u.codebleu)) : json(nullptr);
        j["tests_passed"] = u.tests_passed ? json(*u.tests_passed) : json(nullptr);
        if (!u.note.empty()) j["note"] = u.note;
        units.push_back(std::move(j));
    }
    json out = {{"schema", kReportSchema},
                {"name", r.name},
                {"n_units", r.n_units},
                {"csr", round1(r.csr)},
                {"ca", round1(r.ca)},
                {"unsafe_ratio", round1(r.unsafe_ratio)},
                {"per_unit", units},
                {"warnings", r.warnings}};
    out["mean_codebleu"] = r.mean_codebleu ? json(round3(*r.mean_codebleu)) : json(nullptr);
    return out;
}

BenchmarkReport report_from_json(const json& j) {
    if (j.value("schema", "") != kReportSchema) throw FatalError("unsupported report schema: " + j.value("schema", "(none)"));
    BenchmarkReport r;
    r.name = j.at("name").get<std::string>();
    r.n_units = j.at("n_units").get<std::size_t>();
    r.csr = j.at("csr").get<double>();
    r.ca = j.at("ca").get<double>();
    r.unsafe_ratio = j.value("unsafe_ratio", 0.0);
    if (j.contains("mean_codebleu") && !j["mean_codebleu"].is_null()) r.mean_codebleu = j["mean_codebleu"].get<double>();
    for (const auto& u : j.value("per_unit", json::array())) {
        UnitResult x;
        x.unit_id = u.at("unit").get<std::string>();
        x.status = refine::parse_status(u.at("status").get<std::string>());
        x.n_err = u.value("n_err", std::size_t{0});
        if (u.contains("codebleu") && !u["codebleu"].is_null()) x.codebleu = u["codebleu"].get<double>();
        if (u.contains("tests_passed") && !u["tests_passed"].is_null()) x.tests_passed = u["tests_passed"].get<bool>();
        x.note = u.value("note", "");
        r.per_unit.push_back(std::move(x));
    }
    r.warnings = j.value("warnings", std::vector<std::string>{});
    return r;
}

std::string summary_table(const std::vector<BenchmarkReport>& reports) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %7s %7s %7s %9s %8s\n", "benchmark", "units", "CSR", "CA", "CodeBLEU", "unsafe%");
    out << line;
    for (const auto& r : reports) {
        std::string bleu = r.mean_codebleu ? std::to_string(round3(*r.mean_codebleu)).substr(0, 5) : "-";
        std::snprintf(line, sizeof line, "%-20s %7zu %7s %7s %9s %8s\n", r.name.c_str(), r.n_units, format1(r.csr).c_str(),
                      format1(r.ca).c_str(), bleu.c_str(), format1(r.unsafe_ratio).c_str());
        out << line;
    }
    return out.str();
}

} // namespace c2r::metrics
