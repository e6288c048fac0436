#include "c2r/toolchain.hpp"

#include "c2r/util/process.hpp"
#include "c2r/util/text.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>

namespace fs = std::filesystem;

namespace c2r::tc {

namespace {

constexpr std::string_view kPrelude =
    "#![allow(dead_code, unused_imports, unused_variables, unused_mut, unused_assignments, non_snake_case,\n"
    "         non_camel_case_types, non_upper_case_globals, unused_parens, unused_unsafe)]\n";

std::atomic<unsigned> g_workspace_counter{0};

// Temp workspace that is either removed or moved into the artifacts directory.
struct Workspace {
    TempDir dir;
    const ToolchainOptions& options;

    explicit Workspace(const ToolchainOptions& opts) : dir("c2r-ws"), options(opts) {}
    ~Workspace() {
        if (!options.keep_artifacts) return;
        try {
            dir.keep();
            if (!options.artifacts_dir.empty()) {
                fs::create_directories(options.artifacts_dir);
                auto dest = options.artifacts_dir / ("ws-" + std::to_string(g_workspace_counter++));
                fs::rename(dir.path(), dest);
            }
        } catch (const std::exception& e) {
            spdlog::warn("could not keep workspace {}: {}", dir.path().string(), e.what());
        }
    }
};

} // namespace

std::string compose_crate(const std::string& code, const Scaffold& scaffold) {
    std::string out(kPrelude);
    for (std::size_t i = 0; i < scaffold.prior_code.size(); ++i) {
        out += "\n// ---- prior: " + (i < scaffold.prior_units.size() ? scaffold.prior_units[i] : std::string("?")) + "\n";
        out += scaffold.prior_code[i];
        out += "\n";
    }
    out += "\n// ---- unit\n";
    out += code;
    out += "\n";
    return out;
}

void preflight(const ToolchainOptions& options) {
    auto r = run_process({options.rustc, "--version"}, {.cwd = {}, .env = {}, .timeout = std::chrono::seconds(30)});
    if (!r.ok()) throw FatalError("rust compiler not usable: " + options.rustc + (r.spawn_failed ? " (not found)" : ""));
}

diag::CompileReport compile_unit(const std::string& code, const Scaffold& scaffold, const ToolchainOptions& options) {
    Workspace ws(options);
    auto src = ws.dir.path() / "lib.rs";
    write_file(src, compose_crate(code, scaffold));
    std::vector<std::string> argv = {options.rustc,   "--edition", options.edition, "--crate-type", "lib",
                                     "--crate-name",  "unit",      "--error-format=json", "--emit=metadata",
                                     "--out-dir",     (ws.dir.path() / "out").string(), src.string()};
    auto start = std::chrono::steady_clock::now();
    auto r = run_process(argv, {.cwd = ws.dir.path(), .env = {}, .timeout = options.timeout});
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    if (r.spawn_failed) throw FatalError("could not run " + options.rustc);

    auto diags = diag::parse_rustc_json(r.err);
    if (r.timed_out) {
        diag::Diagnostic d;
        d.code = "TIMEOUT";
        d.message = "compilation exceeded " + std::to_string(options.timeout.count()) + " ms";
        diags.push_back(std::move(d));
    }
    return diag::make_report(std::move(diags), r.exit_code, r.timed_out, elapsed);
}

TestOutcome parse_test_output(const std::string& output) {
    TestOutcome t;
    bool result_line = false;
    for (const auto& raw : split_lines(output)) {
        auto line = trim(raw);
        if (line.starts_with("test ") && line.ends_with(" ... ok")) ++t.passed;
        else if (line.starts_with("test ") && line.ends_with(" ... FAILED")) ++t.failed;
        else if (line.starts_with("test result:")) result_line = true;
    }
    t.ran = true;
    if (!result_line) {
        t.harness_error = true;
        t.note = "no test result line";
    }
    return t;
}

TestOutcome run_unit_tests(const std::string& code, const Scaffold& scaffold, const std::string& tests,
                           const ToolchainOptions& options) {
    Workspace ws(options);
    auto src = ws.dir.path() / "lib.rs";
    write_file(src, compose_crate(code, scaffold) + "\n#[cfg(test)]\nmod c2r_tests {\n    use super::*;\n" + tests + "\n}\n");
    auto bin = ws.dir.path() / "unit_tests";
    auto c = run_process({options.rustc, "--edition", options.edition, "--test", "--crate-name", "unit", "-o", bin.string(),
                          src.string()},
                         {.cwd = ws.dir.path(), .env = {}, .timeout = options.timeout});
    TestOutcome t;
    if (!c.ok()) {
        t.note = c.timed_out ? "test build timed out" : "test build failed";
        return t;
    }
    auto r = run_process({bin.string(), "--test-threads=1"}, {.cwd = ws.dir.path(), .env = {}, .timeout = options.timeout});
    t = parse_test_output(r.out);
    if (r.timed_out || r.spawn_failed) {
        t.harness_error = true;
        t.note = r.timed_out ? "tests timed out" : "could not start test binary";
    } else if (r.exit_code != 0 && t.failed == 0) {
        t.harness_error = true;
        t.note = "test binary exited with status " + std::to_string(r.exit_code);
    }
    return t;
}

} // namespace c2r::tc
