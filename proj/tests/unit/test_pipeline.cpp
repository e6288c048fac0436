#include "c2r/config.hpp"
#include "c2r/pipeline.hpp"
#include "c2r/util/process.hpp"
#include "c2r/util/text.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>

namespace fs = std::filesystem;
using namespace c2r;
using namespace c2r::pipeline;
using nlohmann::json;

namespace {

const fs::path kFixtures = C2R_FIXTURES;

RunConfig repo_config(const fs::path& out, std::size_t compile_iters = 3, std::size_t consistency_iters = 2) {
    RunConfig c;
    c.c_root = kFixtures / "c_repo";
    c.pool_root = kFixtures / "rust_pool";
    c.output_dir = out;
    c.mock_script = kFixtures / "mock" / "repo_fix_on_diagnostics.json";
    c.compile_iters = compile_iters;
    c.consistency_iters = consistency_iters;
    return c;
}

std::map<std::string, refine::Status> statuses(const RunResult& r) {
    std::map<std::string, refine::Status> out;
    for (const auto& rec : r.records) out[rec.unit_id] = rec.status;
    return out;
}

ProcessResult cli(std::vector<std::string> args) {
    args.insert(args.begin(), C2R_CLI);
    ProcessOptions o;
    o.timeout = std::chrono::minutes(5);
    return run_process(args, o);
}

} // namespace

TEST(Config, FilePathsResolveAgainstTheFileDirectory) {
    TempDir dir("c2r-test");
    write_file(dir.path() / "run.ini", "[run]\nc_root = src\noutput_dir = /tmp/abs\n\n[budgets]\ncompile_iters = 5\n\n"
                                       "[context]\nsimilarity_floor = 0.5\nplain_deps = yes\n");
    RunConfig c;
    apply_values(c, read_config_file(dir.path() / "run.ini"), dir.path());
    EXPECT_EQ(c.c_root, dir.path() / "src");
    EXPECT_EQ(c.output_dir, "/tmp/abs");
    EXPECT_EQ(c.compile_iters, 5u);
    EXPECT_EQ(c.consistency_iters, 2u);
    EXPECT_EQ(c.similarity_floor, 0.5);
    EXPECT_TRUE(c.plain_deps);
}

TEST(Config, LaterLayersWin) {
    RunConfig c;
    apply_values(c, {{"budgets.compile_iters", "5"}, {"backend.endpoint", "http://file"}});
    apply_values(c, {{"budgets.compile_iters", "1"}});
    EXPECT_EQ(c.compile_iters, 1u);
    ::setenv("C2R_ENDPOINT", "http://env", 1);
    ::setenv("C2R_TOKEN", "tok", 1);
    apply_environment(c);
    ::unsetenv("C2R_ENDPOINT");
    ::unsetenv("C2R_TOKEN");
    EXPECT_EQ(c.endpoint, "http://file"); // set values are kept
    EXPECT_EQ(c.token, "tok");
}

TEST(Config, RejectsBadValues) {
    RunConfig c;
    EXPECT_THROW(apply_values(c, {{"run.colour", "x"}}), FatalError);
    EXPECT_THROW(apply_values(c, {{"budgets.compile_iters", "-1"}}), FatalError);
    EXPECT_THROW(apply_values(c, {{"budgets.compile_iters", "3x"}}), FatalError);
    EXPECT_THROW(apply_values(c, {{"context.plain_deps", "maybe"}}), FatalError);
    EXPECT_THROW(apply_values(c, {{"backend.kind", "magic"}}), FatalError);
    EXPECT_THROW(read_config_file("/nonexistent.ini"), FatalError);
}

TEST(Config, ValidationNamesTheProblem) {
    auto ok = repo_config("/tmp/x");
    EXPECT_NO_THROW(validate(ok));
    auto expect_invalid = [&](auto mutate, const std::string& words) {
        auto c = ok;
        mutate(c);
        try {
            validate(c);
            ADD_FAILURE() << "accepted: " << words;
        } catch (const FatalError& e) {
            EXPECT_NE(std::string(e.what()).find(words), std::string::npos) << e.what();
        }
    };
    expect_invalid([](RunConfig& c) { c.c_root.clear(); }, "c_root");
    expect_invalid([](RunConfig& c) { c.candidates = 0; }, "candidates");
    expect_invalid([](RunConfig& c) { c.alpha = c.beta = 0; }, "both be 0");
    expect_invalid([](RunConfig& c) { c.beta = -1; }, "non-negative");
    expect_invalid([](RunConfig& c) { c.similarity_floor = 1.5; }, "similarity_floor");
    expect_invalid([](RunConfig& c) { c.mock_script.clear(); }, "mock_script");
    expect_invalid([](RunConfig& c) { c.backend = BackendKind::Remote; }, "endpoint");
    expect_invalid([](RunConfig& c) { c.max_levels = 0; }, "max_levels");
}

TEST(Config, SnapshotRoundTripsWithoutToken) {
    auto c = repo_config("/tmp/out");
    c.token = "secret";
    c.similarity_floor = 0.1;
    c.max_levels = 2;
    c.templates_dir = "/tmp/t";
    auto text = snapshot(c);
    EXPECT_EQ(text.find("secret"), std::string::npos);
    TempDir dir("c2r-test");
    write_file(dir.path() / "snap.ini", text);
    RunConfig back;
    apply_values(back, read_config_file(dir.path() / "snap.ini"));
    c.token.clear();
    EXPECT_EQ(back, c);
}

TEST(Pipeline, FullBudgetsCompileEverything) {
    TempDir dir("c2r-test");
    auto r = run_translate(repo_config(dir.path() / "run"));
    ASSERT_EQ(r.exit_code, kAllCompiled) << r.error;
    EXPECT_TRUE(r.complete);
    EXPECT_EQ(r.report.csr, 100.0);
    EXPECT_EQ(r.gateway_calls, 18u); // 5 bridge + 5 translate + 3 repair + 5 consistency
    for (const auto& [id, s] : statuses(r)) EXPECT_EQ(s, refine::Status::Functional) << id;

    auto run = dir.path() / "run";
    for (const char* f : {"report.json", "summary.txt", "trace.txt", "graph.tsv", "config.ini", "checkpoint.json", "run.log"})
        EXPECT_TRUE(fs::exists(run / f)) << f;
    EXPECT_EQ(std::distance(fs::directory_iterator(run / "records"), fs::directory_iterator{}), 5);
    EXPECT_EQ(std::distance(fs::directory_iterator(run / "rust"), fs::directory_iterator{}), 5);
    auto cp = json::parse(read_file(run / "checkpoint.json"));
    EXPECT_TRUE(cp["complete"].get<bool>());
    EXPECT_EQ(cp["levels_done"], 3);

    // callees are compiled in as scaffold, in level order
    auto total = load_records(run);
    auto it = std::find_if(total.begin(), total.end(), [](const auto& t) { return t.unit_id == "main.c::total"; });
    ASSERT_NE(it, total.end());
    EXPECT_EQ(it->scaffold_units, (std::vector<std::string>{"geom.c::dot", "util.c::clamp", "geom.c::norm1", "util.c::scale"}));
    EXPECT_EQ(it->budget_used.compile_iters, 1u);
}

TEST(Pipeline, NoRepairBudgetsFailInjectedUnits) {
    TempDir dir("c2r-test");
    auto r = run_translate(repo_config(dir.path() / "run", 0, 0));
    EXPECT_EQ(r.exit_code, kPartial);
    EXPECT_LE(r.report.csr, 40.0);
    EXPECT_DOUBLE_EQ(r.report.csr, 40.0);
    EXPECT_EQ(r.gateway_calls, 10u);
    auto s = statuses(r);
    EXPECT_EQ(s["util.c::clamp"], refine::Status::Compiled);
    EXPECT_EQ(s["util.c::scale"], refine::Status::Failed);
    EXPECT_TRUE(r.trace.was_skipped("compile-repair"));
    EXPECT_TRUE(r.trace.was_skipped("consistency"));
}

TEST(Pipeline, MissingCompilerIsFatalBeforeAnyRequest) {
    TempDir dir("c2r-test");
    auto c = repo_config(dir.path() / "run");
    c.rustc = "/nonexistent/rustc";
    std::size_t requests = 0;
    RunOptions o;
    o.hooks.request_hook = [&](const llm::CompletionRequest&) { ++requests; };
    auto r = run_translate(c, o);
    EXPECT_EQ(r.exit_code, kFatal);
    EXPECT_NE(r.error.find("rust compiler"), std::string::npos);
    EXPECT_EQ(requests, 0u);

    auto bad = repo_config(dir.path() / "run2");
    bad.mock_script = dir.path() / "missing.json";
    EXPECT_EQ(run_translate(bad).exit_code, kFatal);
}

TEST(Pipeline, ReportsAreDeterministic) {
    TempDir dir("c2r-test");
    auto a = run_translate(repo_config(dir.path() / "a"));
    auto b = run_translate(repo_config(dir.path() / "b"));
    ASSERT_EQ(a.exit_code, kAllCompiled);
    EXPECT_EQ(read_file(dir.path() / "a" / "report.json"), read_file(dir.path() / "b" / "report.json"));
    for (const auto& e : fs::directory_iterator(dir.path() / "a" / "records"))
        EXPECT_EQ(read_file(e.path()), read_file(dir.path() / "b" / "records" / e.path().filename()));
}

TEST(Pipeline, ResumeContinuesFromCheckpoint) {
    TempDir dir("c2r-test");
    auto fresh = run_translate(repo_config(dir.path() / "fresh"));
    auto c = repo_config(dir.path() / "run");
    c.max_levels = 1;
    auto first = run_translate(c);
    EXPECT_EQ(first.exit_code, kPartial);
    EXPECT_FALSE(first.complete);
    EXPECT_EQ(first.records.size(), 2u);

    c.max_levels.reset();
    RunOptions resume;
    resume.resume = true;
    auto second = run_translate(c, resume);
    ASSERT_EQ(second.exit_code, kAllCompiled) << second.error;
    EXPECT_TRUE(second.trace.was_run("resume"));
    EXPECT_EQ(first.gateway_calls + second.gateway_calls, fresh.gateway_calls);
    EXPECT_EQ(read_file(dir.path() / "run" / "report.json"), read_file(dir.path() / "fresh" / "report.json"));

    auto changed = c;
    changed.compile_iters = 1;
    auto refused = run_translate(changed, resume);
    EXPECT_EQ(refused.exit_code, kFatal);
    EXPECT_NE(refused.error.find("configuration changed"), std::string::npos);
}

TEST(Pipeline, AblationsShowInTheTrace) {
    TempDir dir("c2r-test");
    auto full = run_translate(repo_config(dir.path() / "full"));
    for (const char* stage : {"pool", "align", "bridge", "translate", "compile-repair", "consistency"})
        EXPECT_TRUE(full.trace.was_run(stage)) << stage;

    auto plain = repo_config(dir.path() / "plain");
    plain.plain_deps = true;
    auto p = run_translate(plain);
    for (const char* stage : {"pool", "align", "bridge"}) EXPECT_TRUE(p.trace.was_skipped(stage)) << stage;
    EXPECT_TRUE(p.trace.was_run("compile-repair"));
    EXPECT_EQ(p.gateway_calls, 13u); // no bridge requests

    auto no_compile = run_translate(repo_config(dir.path() / "nc", 0, 2));
    EXPECT_TRUE(no_compile.trace.was_skipped("compile-repair"));
    EXPECT_TRUE(no_compile.trace.was_run("consistency"));

    auto no_consistency = run_translate(repo_config(dir.path() / "ncs", 3, 0));
    EXPECT_TRUE(no_consistency.trace.was_run("compile-repair"));
    EXPECT_TRUE(no_consistency.trace.was_skipped("consistency"));
    EXPECT_EQ(no_consistency.report.csr, 100.0);
    for (const auto& [id, s] : statuses(no_consistency)) EXPECT_EQ(s, refine::Status::Compiled) << id;

    auto text = read_file(dir.path() / "plain" / "trace.txt");
    EXPECT_NE(text.find("align skipped: plain-deps"), std::string::npos);
}

TEST(Pipeline, RecordJsonRoundTrip) {
    TempDir dir("c2r-test");
    auto r = run_translate(repo_config(dir.path() / "run"));
    for (const auto& rec : r.records) {
        auto back = record_from_json(record_to_json(rec));
        EXPECT_EQ(record_to_json(back), record_to_json(rec));
        EXPECT_EQ(back.status, rec.status);
        EXPECT_EQ(back.final_code, rec.final_code);
    }
    auto units = unit_results(r.records);
    ASSERT_EQ(units.size(), 5u);
    EXPECT_TRUE(std::is_sorted(units.begin(), units.end(), [](auto& a, auto& b) { return a.unit_id < b.unit_id; }));
}

TEST(Evaluate, ReferenceTestsAndSimilarity) {
    TempDir dir("c2r-test");
    auto run = dir.path() / "run";
    ASSERT_EQ(run_translate(repo_config(run)).exit_code, kAllCompiled);
    BenchmarkSpec spec;
    spec.name = "fixture";
    spec.units["util.c::clamp"] = {"#[test] fn hi() { assert_eq!(clamp(9, 0, 3), 3); }",
                                   "pub fn clamp(v: i32, lo: i32, hi: i32) -> i32 { v.max(lo).min(hi) }"};
    spec.units["main.c::total"] = {"#[test] fn t() { assert_eq!(total(Point { x: 1, y: -2 }, 10), 31); }", ""};
    spec.units["geom.c::dot"] = {"#[test] fn wrong() { assert_eq!(dot(Point { x: 1, y: 1 }, Point { x: 1, y: 1 }), 3); }", ""};
    auto e = run_evaluate(repo_config(run), {run}, {spec});
    ASSERT_EQ(e.exit_code, kAllCompiled) << e.error;
    ASSERT_EQ(e.reports.size(), 1u);
    const auto& rep = e.reports[0];
    EXPECT_EQ(rep.name, "fixture");
    EXPECT_DOUBLE_EQ(rep.ca, 40.0);
    EXPECT_EQ(rep.csr, 100.0);
    ASSERT_TRUE(rep.mean_codebleu);
    EXPECT_GT(*rep.mean_codebleu, 0.0);
    EXPECT_LT(*rep.mean_codebleu, 1.0);
    EXPECT_TRUE(fs::exists(run / "evaluation.json"));

    auto two = run_evaluate(repo_config(run), {run, run}, {spec});
    ASSERT_EQ(two.reports.size(), 3u);
    EXPECT_EQ(two.reports[2].name, "TOTAL");
    EXPECT_EQ(two.reports[2].n_units, 10u);
}

TEST(Evaluate, FatalInputs) {
    TempDir dir("c2r-test");
    BenchmarkSpec empty{"empty", {}};
    EXPECT_EQ(run_evaluate(repo_config(dir.path()), {dir.path()}, {empty}).exit_code, kFatal);
    BenchmarkSpec one{"one", {{"x", {"", "fn x() {}"}}}};
    EXPECT_EQ(run_evaluate(repo_config(dir.path()), {}, {one}).exit_code, kFatal);
    EXPECT_EQ(run_evaluate(repo_config(dir.path()), {dir.path()}, {one}).exit_code, kFatal); // no checkpoint

    auto c = repo_config(dir.path() / "partial");
    c.max_levels = 1;
    run_translate(c);
    auto e = run_evaluate(c, {dir.path() / "partial"}, {one});
    EXPECT_EQ(e.exit_code, kFatal);
    EXPECT_NE(e.error.find("incomplete"), std::string::npos);

    write_file(dir.path() / "spec.json", R"({"name": "s", "units": {"a.c::f": {"tests": "", "reference": "fn f() {}"}}})");
    EXPECT_EQ(load_benchmark_spec(dir.path() / "spec.json").units.size(), 1u);
    EXPECT_THROW(load_benchmark_spec(dir.path() / "nope.json"), FatalError);
}

TEST(Cli, AnalyzeTranslateReport) {
    TempDir dir("c2r-test");
    auto analyze = cli({"analyze", "--c-root", (kFixtures / "c_repo").string()});
    EXPECT_EQ(analyze.exit_code, 0) << analyze.err;
    EXPECT_TRUE(analyze.out.starts_with("# id\tlevel\tcomponent\tcallees\texternals\n"));
    EXPECT_NE(analyze.out.find("main.c::total\t2"), std::string::npos);

    auto out = dir.path() / "run";
    auto translate = cli({"translate", "--c-root", (kFixtures / "c_repo").string(), "--mock-script",
                          (kFixtures / "mock" / "repo_fix_on_diagnostics.json").string(), "--output", out.string(),
                          "--no-repair"});
    EXPECT_EQ(translate.exit_code, 1) << translate.err;
    EXPECT_NE(translate.out.find("40.0"), std::string::npos);
    auto trace = read_file(out / "trace.txt");
    EXPECT_NE(trace.find("compile-repair skipped"), std::string::npos);
    EXPECT_NE(trace.find("consistency skipped"), std::string::npos);

    auto report = cli({"report", (out / "report.json").string(), (out / "report.json").string(), "--aggregate"});
    EXPECT_EQ(report.exit_code, 0) << report.err;
    EXPECT_NE(report.out.find("TOTAL"), std::string::npos);
}

TEST(Cli, ConfigFileAndErrors) {
    TempDir dir("c2r-test");
    write_file(dir.path() / "c2r.ini", "[run]\nc_root = " + (kFixtures / "c_repo").string() + "\noutput_dir = out\n\n"
                                       "[backend]\nmock_script = " + (kFixtures / "mock" / "repo_fix_on_diagnostics.json").string() +
                                       "\n\n[toolchain]\nrustc = /nonexistent/rustc\n");
    auto fatal = cli({"--config", (dir.path() / "c2r.ini").string(), "translate"});
    EXPECT_EQ(fatal.exit_code, 2);
    EXPECT_NE(fatal.err.find("rust compiler"), std::string::npos);
    auto fixed = cli({"--config", (dir.path() / "c2r.ini").string(), "translate", "--rustc", "rustc", "--compile-iters", "3"});
    EXPECT_EQ(fixed.exit_code, 0) << fixed.err;
    EXPECT_TRUE(fs::exists(dir.path() / "out" / "report.json"));

    EXPECT_EQ(cli({}).exit_code, 2);
    EXPECT_EQ(cli({"translate", "--bogus"}).exit_code, 2);
    EXPECT_EQ(cli({"translate"}).exit_code, 2); // no c_root
    EXPECT_EQ(cli({"--help"}).exit_code, 0);
}
