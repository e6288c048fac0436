#include "c2r/c_analyzer.hpp"
#include "c2r/call_graph.hpp"
#include "c2r/config.hpp"
#include "c2r/metrics.hpp"
#include "c2r/pipeline.hpp"
#include "c2r/rust_pool.hpp"
#include "c2r/util/text.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <iostream>

namespace fs = std::filesystem;
using namespace c2r;

namespace {

// CLI values use the same "section.key" names as the config file.
struct Overrides {
    ConfigValues values;
    std::map<std::string, std::string> scratch;

    void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        app->add_option(flag, scratch[key], help);
    }
    void add_flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& value,
                  const std::string& help) {
        app->add_flag_callback(flag, [this, key, value] { values[key] = value; }, help);
    }
    ConfigValues collect() const {
        auto out = values;
        for (const auto& [k, v] : scratch)
            if (!v.empty()) out[k] = v;
        return out;
    }
};

RunConfig load_config(const std::string& config_file, const Overrides& cli) {
    RunConfig cfg;
    if (!config_file.empty()) {
        auto values = read_config_file(config_file);
        apply_values(cfg, values, fs::path(config_file).parent_path());
    }
    apply_values(cfg, cli.collect());
    apply_environment(cfg);
    return cfg;
}

void add_run_options(CLI::App* app, Overrides& o) {
    o.add(app, "--c-root", "run.c_root", "C repository to translate");
    o.add(app, "--pool-root", "run.pool_root", "existing Rust code used as the dependency pool");
    o.add(app, "--output,-o", "run.output_dir", "run directory");
    o.add(app, "--jobs,-j", "run.jobs", "units refined in parallel within a level");
    o.add(app, "--max-levels", "run.max_levels", "stop after this many levels (checkpointed)");
    o.add(app, "--backend", "backend.kind", "mock or remote");
    o.add(app, "--mock-script", "backend.mock_script", "scripted replies for the mock backend");
    o.add(app, "--model", "backend.model", "model name sent to the remote backend");
    o.add(app, "--embedding", "backend.embedding", "hashing, or an embeddings endpoint URL");
    o.add(app, "--compile-iters", "budgets.compile_iters", "diagnostic repair rounds per unit");
    o.add(app, "--consistency-iters", "budgets.consistency_iters", "consistency audits per unit");
    o.add(app, "--candidates", "budgets.candidates", "candidates sampled per unit (best-of-G)");
    o.add(app, "--similarity-floor", "context.similarity_floor", "minimum cosine similarity for pool matches");
    o.add(app, "--top-k", "context.top_k", "pool entries retrieved per dependency");
    o.add(app, "--verbatim-threshold", "context.verbatim_threshold", "token size above which dependencies are summarized");
    o.add(app, "--context-budget", "context.budget", "prompt token budget");
    o.add(app, "--templates", "context.templates_dir", "directory of prompt template overrides");
    o.add(app, "--alpha", "scoring.alpha", "compilation reward weight");
    o.add(app, "--beta", "scoring.beta", "alignment reward weight");
    o.add(app, "--rustc", "toolchain.rustc", "rustc executable");
    o.add(app, "--timeout", "toolchain.timeout", "compile timeout in seconds");
    o.add_flag(app, "--keep-artifacts", "toolchain.keep_artifacts", "true", "keep compile workspaces in the run directory");
    o.add_flag(app, "--plain-deps", "context.plain_deps", "true", "ablation: raw C dependencies only, no pool, no bridge");
    o.add_flag(app, "--no-compile", "budgets.compile_iters", "0", "ablation: no diagnostic repair");
    o.add_flag(app, "--no-consistency", "budgets.consistency_iters", "0", "ablation: no consistency audit");
    app->add_flag_callback(
        "--no-repair",
        [&o] {
            o.values["budgets.compile_iters"] = "0";
            o.values["budgets.consistency_iters"] = "0";
        },
        "ablation: single-shot translation, no repair of any kind");
}

int cmd_analyze(const RunConfig& cfg) {
    if (cfg.c_root.empty()) throw FatalError("--c-root is required");
    auto repo = c::parse_c_repo(cfg.c_root, {{".c", ".h"}, cfg.jobs});
    auto graph = c::build_call_graph(repo);
    auto order = c::topological_order(graph);
    std::cout << c::dump_graph(graph, order);
    for (const auto& s : repo.skipped()) std::cerr << "skipped " << s.path << ": " << s.reason << "\n";
    if (cfg.pool_root) std::cout << "\n" << pool::build_pool(*cfg.pool_root).dump();
    return pipeline::kAllCompiled;
}

int cmd_translate(const RunConfig& cfg, bool resume) {
    pipeline::RunOptions options;
    options.resume = resume;
    auto res = pipeline::run_translate(cfg, options);
    if (res.exit_code == pipeline::kFatal) {
        std::cerr << "c2r: " << res.error << "\n";
        return res.exit_code;
    }
    std::cout << metrics::summary_table({res.report});
    std::cout << "run directory: " << res.run_dir.string() << "\n";
    return res.exit_code;
}

int cmd_evaluate(const RunConfig& cfg, const std::vector<std::string>& run_dirs, const std::vector<std::string>& benchmarks,
                 const std::string& out) {
    std::vector<pipeline::BenchmarkSpec> specs;
    for (const auto& b : benchmarks) specs.push_back(pipeline::load_benchmark_spec(b));
    std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
    auto res = pipeline::run_evaluate(cfg, dirs, specs);
    if (res.exit_code == pipeline::kFatal) {
        std::cerr << "c2r: " << res.error << "\n";
        return res.exit_code;
    }
    std::cout << metrics::summary_table(res.reports);
    if (!out.empty()) {
        auto arr = nlohmann::json::array();
        for (const auto& r : res.reports) arr.push_back(metrics::to_json(r));
        write_file(out, arr.dump(2) + "\n");
    }
    return res.exit_code;
}

int cmd_report(const std::vector<std::string>& files, bool aggregate_all) {
    std::vector<metrics::BenchmarkReport> reports;
    for (const auto& f : files) {
        auto j = nlohmann::json::parse(read_file(f), nullptr, false);
        if (j.is_discarded()) throw FatalError("not JSON: " + f);
        if (j.is_array()) {
            for (const auto& r : j) reports.push_back(metrics::report_from_json(r));
        } else {
            reports.push_back(metrics::report_from_json(j));
        }
    }
    if (reports.empty()) throw FatalError("no reports given");
    if (aggregate_all && reports.size() > 1) reports.push_back(metrics::aggregate(reports));
    std::cout << metrics::summary_table(reports);
    for (const auto& r : reports)
        for (const auto& w : r.warnings) std::cerr << "warning: " << r.name << ": " << w << "\n";
    return pipeline::kAllCompiled;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"c2r: dependency-guided C to Rust migration"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_file;
    bool verbose = false;
    app.add_option("--config,-c", config_file, "INI configuration file")->check(CLI::ExistingFile);
    app.add_flag("--verbose,-v", verbose, "debug logging");

    Overrides analyze_o, translate_o, evaluate_o;
    auto* analyze = app.add_subcommand("analyze", "print the call graph, levels and pool index");
    analyze_o.add(analyze, "--c-root", "run.c_root", "C repository");
    analyze_o.add(analyze, "--pool-root", "run.pool_root", "Rust dependency pool");

    auto* translate = app.add_subcommand("translate", "translate a C repository level by level");
    add_run_options(translate, translate_o);
    bool resume = false;
    translate->add_flag("--resume", resume, "continue from the run directory's checkpoint");

    auto* evaluate = app.add_subcommand("evaluate", "score completed runs against a benchmark spec");
    std::vector<std::string> run_dirs, benchmarks;
    std::string eval_out;
    evaluate->add_option("--run-dir", run_dirs, "completed run directory (repeatable)")->required();
    evaluate->add_option("--benchmark", benchmarks, "benchmark spec JSON (one, or one per run)")->required();
    evaluate->add_option("--out", eval_out, "write all reports as a JSON array");
    evaluate_o.add(evaluate, "--rustc", "toolchain.rustc", "rustc executable");
    evaluate_o.add(evaluate, "--timeout", "toolchain.timeout", "test timeout in seconds");

    auto* report = app.add_subcommand("report", "print report files as a table");
    std::vector<std::string> report_files;
    bool aggregate_all = false;
    report->add_option("reports", report_files, "report.json / evaluation.json files")->required();
    report->add_flag("--aggregate", aggregate_all, "append a unit-weighted TOTAL row");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return e.get_exit_code() == 0 ? app.exit(e) : (app.exit(e), pipeline::kFatal);
    }
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

    try {
        if (*analyze) return cmd_analyze(load_config(config_file, analyze_o));
        if (*translate) return cmd_translate(load_config(config_file, translate_o), resume);
        if (*evaluate) {
            auto cfg = load_config(config_file, evaluate_o);
            return cmd_evaluate(cfg, run_dirs, benchmarks, eval_out);
        }
        if (*report) return cmd_report(report_files, aggregate_all);
    } catch (const std::exception& e) {
        std::cerr << "c2r: " << e.what() << "\n";
        return pipeline::kFatal;
    }
    return pipeline::kFatal;
}
