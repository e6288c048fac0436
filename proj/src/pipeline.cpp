#include "c2r/pipeline.hpp"

#include "c2r/aligner.hpp"
#include "c2r/c_analyzer.hpp"
#include "c2r/call_graph.hpp"
#include "c2r/codebleu.hpp"
#include "c2r/context_builder.hpp"
#include "c2r/embedding.hpp"
#include "c2r/rust_pool.hpp"
#include "c2r/scoring.hpp"
#include "c2r/toolchain.hpp"
#include "c2r/util/text.hpp"

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <set>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace c2r::pipeline {

// ---- trace ----

void StageTrace::ran(const std::string& stage, const std::string& detail) {
    lines_.push_back(stage + " ran" + (detail.empty() ? "" : ": " + detail));
}

void StageTrace::skipped(const std::string& stage, const std::string& reason) {
    lines_.push_back(stage + " skipped: " + reason);
}

bool StageTrace::was_skipped(const std::string& stage) const {
    return std::any_of(lines_.begin(), lines_.end(), [&](const std::string& l) { return l.starts_with(stage + " skipped"); });
}

bool StageTrace::was_run(const std::string& stage) const {
    return std::any_of(lines_.begin(), lines_.end(), [&](const std::string& l) { return l.starts_with(stage + " ran"); });
}

std::string StageTrace::text() const {
    std::string out;
    for (const auto& l : lines_) out += l + "\n";
    return out;
}

// ---- records ----

namespace {

json report_to_json(const diag::CompileReport& r) {
    json diags = json::array();
    for (const auto& d : r.diagnostics) {
        json j = {{"code", d.code}, {"severity", std::string(diag::to_string(d.severity))}, {"message", d.message}};
        if (d.location) {
            // workspace paths are temporary; keep the file name only
            j["file"] = fs::path(d.location->file).filename().string();
            j["line"] = d.location->line;
            j["column"] = d.location->column;
        }
        diags.push_back(std::move(j));
    }
    return {{"success", r.success}, {"n_err", r.n_err}, {"exit_code", r.exit_code}, {"timed_out", r.timed_out},
            {"diagnostics", diags}};
}

diag::CompileReport report_from_json(const json& j) {
    diag::CompileReport r;
    r.success = j.at("success").get<bool>();
    r.n_err = j.at("n_err").get<std::size_t>();
    r.exit_code = j.value("exit_code", 0);
    r.timed_out = j.value("timed_out", false);
    for (const auto& d : j.value("diagnostics", json::array())) {
        diag::Diagnostic x;
        x.code = d.value("code", "");
        x.severity = diag::parse_severity(d.value("severity", "other"));
        x.message = d.value("message", "");
        if (d.contains("line"))
            x.location = diag::Location{d.value("file", ""), d.at("line").get<std::size_t>(), d.value("column", std::size_t{0})};
        r.diagnostics.push_back(std::move(x));
    }
    return r;
}

refine::Origin parse_origin(const std::string& s) {
    if (s == "translate") return refine::Origin::Translate;
    if (s == "repair") return refine::Origin::Repair;
    if (s == "consistency-repair") return refine::Origin::ConsistencyRepair;
    throw FatalError("unknown attempt origin: " + s);
}

} // namespace

json record_to_json(const refine::TranslationRecord& r) {
    json attempts = json::array();
    for (const auto& a : r.attempts) {
        json j = {{"origin", std::string(refine::to_string(a.origin))},
                  {"code", a.code},
                  {"fenced", a.fenced},
                  {"tokens", a.tokens},
                  {"compile", report_to_json(a.report)}};
        if (a.verdict) {
            j["verdict"] = {{"consistent", a.verdict->consistent},
                            {"discrepancies", a.verdict->discrepancies},
                            {"parse_warning", a.verdict->parse_warning},
                            {"skipped", a.verdict->skipped}};
        }
        attempts.push_back(std::move(j));
    }
    return {{"schema", kRecordSchema},
            {"unit", r.unit_id},
            {"members", r.members},
            {"status", std::string(refine::to_string(r.status))},
            {"final_attempt", r.final_attempt},
            {"final_code", r.final_code},
            {"budget_used", {{"compile_iters", r.budget_used.compile_iters}, {"consistency_iters", r.budget_used.consistency_iters}}},
            {"gateway_calls", r.gateway_calls},
            {"bridge_fallback", r.bridge_fallback},
            {"scaffold_units", r.scaffold_units},
            {"notes", r.notes},
            {"attempts", attempts}};
}

refine::TranslationRecord record_from_json(const json& j) {
    if (j.value("schema", "") != kRecordSchema) throw FatalError("unsupported record schema");
    try {
        refine::TranslationRecord r;
        r.unit_id = j.at("unit").get<std::string>();
        r.members = j.at("members").get<std::vector<std::string>>();
        r.status = refine::parse_status(j.at("status").get<std::string>());
        r.final_attempt = j.at("final_attempt").get<std::size_t>();
        r.final_code = j.at("final_code").get<std::string>();
        r.budget_used.compile_iters = j.at("budget_used").at("compile_iters").get<std::size_t>();
        r.budget_used.consistency_iters = j.at("budget_used").at("consistency_iters").get<std::size_t>();
        r.gateway_calls = j.at("gateway_calls").get<std::size_t>();
        r.bridge_fallback = j.value("bridge_fallback", false);
        r.scaffold_units = j.value("scaffold_units", std::vector<std::string>{});
        r.notes = j.value("notes", std::vector<std::string>{});
        for (const auto& a : j.at("attempts")) {
            refine::Attempt x;
            x.origin = parse_origin(a.at("origin").get<std::string>());
            x.code = a.at("code").get<std::string>();
            x.fenced = a.value("fenced", false);
            x.tokens = a.value("tokens", std::size_t{0});
            x.report = report_from_json(a.at("compile"));
            if (a.contains("verdict")) {
                refine::ConsistencyVerdict v;
                v.consistent = a["verdict"].at("consistent").get<bool>();
                v.discrepancies = a["verdict"].value("discrepancies", std::vector<std::string>{});
                v.parse_warning = a["verdict"].value("parse_warning", false);
                v.skipped = a["verdict"].value("skipped", false);
                x.verdict = v;
            }
            r.attempts.push_back(std::move(x));
        }
        if (!r.attempts.empty() && r.final_attempt >= r.attempts.size()) throw FatalError("final_attempt out of range");
        return r;
    } catch (const json::exception& e) {
        throw FatalError(std::string("malformed translation record: ") + e.what());
    }
}

std::vector<refine::TranslationRecord> load_records(const fs::path& run_dir) {
    auto dir = run_dir / "records";
    if (!fs::is_directory(dir)) throw FatalError("run directory has no records: " + run_dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<refine::TranslationRecord> out;
    for (const auto& f : files) {
        auto j = json::parse(read_file(f), nullptr, false);
        if (j.is_discarded()) throw FatalError("unreadable record: " + f.string());
        out.push_back(record_from_json(j));
    }
    return out;
}

std::vector<metrics::UnitResult> unit_results(const std::vector<refine::TranslationRecord>& records) {
    std::vector<metrics::UnitResult> out;
    for (const auto& r : records) {
        std::size_t n_err = r.attempts.empty() ? 0 : r.attempts[r.final_attempt].report.n_err;
        for (const auto& m : r.members) {
            metrics::UnitResult u;
            u.unit_id = m;
            u.status = r.status;
            u.n_err = n_err;
            out.push_back(std::move(u));
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.unit_id < b.unit_id; });
    return out;
}

// ---- translate ----

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

std::string run_name(const fs::path& c_root) {
    auto p = c_root.lexically_normal();
    auto name = p.filename().string();
    if (name.empty()) name = p.parent_path().filename().string();
    return name.empty() ? "run" : name;
}

// Adds a file sink to the default logger for the lifetime of a run.
class RunLog {
public:
    explicit RunLog(const fs::path& file) {
        try {
            sink_ = std::make_shared<spdlog::sinks::basic_file_sink_mt>(file.string(), true);
            spdlog::default_logger()->sinks().push_back(sink_);
        } catch (const spdlog::spdlog_ex& e) {
            spdlog::warn("no run log: {}", e.what());
        }
    }
    ~RunLog() {
        if (!sink_) return;
        auto& sinks = spdlog::default_logger()->sinks();
        sinks.erase(std::remove(sinks.begin(), sinks.end(), sink_), sinks.end());
    }
    RunLog(const RunLog&) = delete;
    RunLog& operator=(const RunLog&) = delete;

private:
    spdlog::sink_ptr sink_;
};

struct Batch {
    std::string id; // members joined by '+'
    std::vector<std::string> members;
    std::size_t level = 0;
};

std::vector<std::vector<Batch>> plan_batches(const c::CallGraph& graph, const c::TranslationOrder& order) {
    std::vector<std::vector<Batch>> levels;
    for (std::size_t l = 0; l < order.levels.size(); ++l) {
        std::vector<Batch> batches;
        std::set<std::string> seen;
        for (const auto& id : order.levels[l]) {
            if (seen.count(id)) continue;
            auto members = graph.component_members(id);
            std::sort(members.begin(), members.end());
            for (const auto& m : members) seen.insert(m);
            batches.push_back({join(members, "+"), members, l});
        }
        std::sort(batches.begin(), batches.end(), [](const Batch& a, const Batch& b) { return a.id < b.id; });
        levels.push_back(std::move(batches));
    }
    return levels;
}

/// Everything the workers share; read-only while a level runs.
struct RunState {
    const RunConfig* config = nullptr;
    const c::RepoModel* repo = nullptr;
    const c::CallGraph* graph = nullptr;
    const c::TranslationOrder* order = nullptr;
    const pool::DependencyPool* pool = nullptr;
    const align::VectorIndex* index = nullptr;
    align::Embedder* embedder = nullptr;
    bool align_enabled = false;
    llm::Gateway* gateway = nullptr;
    const ctx::PromptTemplates* templates = nullptr;
    tc::ToolchainOptions toolchain;
    std::map<std::string, std::string> batch_of; // member -> batch id
    std::map<std::string, refine::TranslationRecord> done; // batch id -> record
    ctx::TranslationStore store;
};

/// Finalized code of the batch's transitive callees that compiled, lowest level first.
tc::Scaffold scaffold_for(const Batch& batch, const RunState& st) {
    std::set<std::string> callee_batches;
    std::set<std::string> visited(batch.members.begin(), batch.members.end());
    std::vector<std::string> stack(batch.members.begin(), batch.members.end());
    while (!stack.empty()) {
        auto id = stack.back();
        stack.pop_back();
        for (const auto& callee : st.graph->callees(id)) {
            if (!visited.insert(callee).second) continue;
            stack.push_back(callee);
            callee_batches.insert(st.batch_of.at(callee));
        }
    }
    std::vector<const refine::TranslationRecord*> recs;
    for (const auto& b : callee_batches) {
        auto it = st.done.find(b);
        if (it != st.done.end() && it->second.status != refine::Status::Failed) recs.push_back(&it->second);
    }
    std::sort(recs.begin(), recs.end(), [&](const auto* a, const auto* b) {
        auto la = st.order->level_of.at(a->members.front());
        auto lb = st.order->level_of.at(b->members.front());
        return la != lb ? la < lb : a->unit_id < b->unit_id;
    });
    tc::Scaffold s;
    for (const auto* r : recs) {
        s.prior_units.push_back(r->unit_id);
        s.prior_code.push_back(r->final_code);
    }
    return s;
}

refine::TranslationRecord translate_batch(const Batch& batch, const RunState& st) {
    const auto& cfg = *st.config;
    std::vector<const c::FunctionUnit*> units;
    std::vector<c::DependencySet> sets;
    for (const auto& m : batch.members) {
        units.push_back(st.repo->find_unit(m));
        sets.push_back(c::extract_dependency_set(m, *st.repo, *st.graph));
    }
    auto deps = batch.members.size() == 1 ? sets.front() : ctx::merge_dependencies(sets, batch.members);

    align::AlignedContext aligned;
    if (st.align_enabled) {
        aligned = align::align_dependencies(deps, *st.pool, st.index, st.embedder, {cfg.top_k, cfg.similarity_floor});
        if (aligned.degraded) spdlog::warn("{}: embedding unavailable, aligned by name", batch.id);
    }

    ctx::BridgeDoc bridge;
    if (!cfg.plain_deps) bridge = ctx::request_bridge_docstring(units, deps, *st.gateway, *st.templates, batch.id);

    ctx::ContextInputs in;
    in.units = units;
    in.deps = &deps;
    in.aligned = &aligned;
    in.pool = st.pool;
    in.order = st.order;
    in.store = &st.store;
    in.bridge_docstring = bridge.text;
    in.bridge_fallback = bridge.fallback;

    ctx::ContextOptions copts;
    copts.verbatim_threshold = cfg.verbatim_threshold;
    copts.budget = cfg.context_budget;
    copts.plain_deps = cfg.plain_deps;

    auto scaffold = scaffold_for(batch, st);
    refine::TranslationRecord best;
    try {
        auto context = ctx::build_context(in, copts, *st.templates);
        refine::RefineEnv env;
        env.gateway = st.gateway;
        env.templates = st.templates;
        env.compile = [&](const std::string& code) { return tc::compile_unit(code, scaffold, st.toolchain); };

        std::vector<refine::TranslationRecord> candidates;
        std::vector<score::CandidateEval> evals;
        for (std::size_t g = 0; g < cfg.candidates; ++g) {
            candidates.push_back(refine::refine_unit(context, cfg.budgets(), env));
            const auto& r = candidates.back();
            score::CandidateEval e;
            e.n_err = static_cast<std::int64_t>(r.attempts[r.final_attempt].report.n_err);
            const auto& v = r.attempts[r.final_attempt].verdict;
            if (v && !v->skipped) e.r_align = v->consistent ? 1.0 : 0.0;
            evals.push_back(e);
        }
        auto ranking = score::rank_candidates(evals, cfg.alpha, cfg.beta);
        best = std::move(candidates[ranking.best]);
        if (cfg.candidates > 1) {
            best.notes.push_back("candidate " + std::to_string(ranking.best + 1) + " of " + std::to_string(cfg.candidates) +
                                 " selected, reward " + std::to_string(ranking.breakdowns[ranking.best].total));
        }
        for (const auto& d : context.dropped) best.notes.push_back("dropped from context: " + d);
    } catch (const ctx::ContextOverflow& e) {
        best.unit_id = batch.id;
        best.members = batch.members;
        best.status = refine::Status::Failed;
        best.notes.push_back(e.what());
    }
    best.bridge_fallback = bridge.fallback;
    best.scaffold_units = scaffold.prior_units;
    spdlog::info("{}: {} after {} attempt(s)", batch.id, refine::to_string(best.status), best.attempts.size());
    return best;
}

void store_record(RunState& st, const Batch& batch, refine::TranslationRecord rec) {
    for (const auto& m : batch.members)
        st.store.put({m, rec.final_code, rec.status != refine::Status::Failed, batch.level});
    st.done[batch.id] = std::move(rec);
}

std::string resume_key(RunConfig c) {
    c.max_levels.reset();
    c.token.clear();
    return snapshot(c);
}

void clear_outputs(const fs::path& run_dir) {
    for (const char* name : {"records", "rust"}) fs::remove_all(run_dir / name);
    for (const char* name : {"report.json", "summary.txt", "checkpoint.json", "trace.txt"}) fs::remove(run_dir / name);
}

void write_checkpoint(const fs::path& run_dir, const RunConfig& cfg, std::size_t levels_done, std::size_t total) {
    json j = {{"schema", kCheckpointSchema},
              {"levels_done", levels_done},
              {"total_levels", total},
              {"complete", levels_done == total},
              {"config", resume_key(cfg)}};
    write_file(run_dir / "checkpoint.json", j.dump(2) + "\n");
}

std::shared_ptr<llm::Backend> make_backend(const RunConfig& cfg) {
    if (cfg.backend == BackendKind::Mock) {
        if (!fs::exists(cfg.mock_script)) throw FatalError("mock script not found: " + cfg.mock_script.string());
        return std::make_shared<llm::MockBackend>(llm::MockBackend::parse_script(read_file(cfg.mock_script)));
    }
    llm::HttpBackendOptions o;
    o.url = cfg.endpoint;
    o.model = cfg.model;
    o.token = cfg.token;
    return std::make_shared<llm::HttpBackend>(o);
}

std::unique_ptr<align::Embedder> make_embedder(const RunConfig& cfg) {
    if (cfg.embedding.empty() || cfg.embedding == "hashing") return std::make_unique<align::HashingEmbedder>();
    align::RemoteEmbedderOptions o;
    o.url = cfg.embedding;
    o.token = cfg.token;
    return std::make_unique<align::RemoteEmbedder>(o);
}

} // namespace

RunResult run_translate(const RunConfig& config, const RunOptions& options) {
    RunResult res;
    res.run_dir = config.output_dir;
    auto& trace = res.trace;
    try {
        validate(config);
        tc::ToolchainOptions topts;
        topts.rustc = config.rustc;
        topts.cargo = config.cargo;
        topts.timeout = config.compile_timeout;
        topts.keep_artifacts = config.keep_artifacts;
        topts.artifacts_dir = config.output_dir / "artifacts";
        tc::preflight(topts);
        trace.ran("preflight", config.rustc);

        auto backend = options.hooks.backend ? options.hooks.backend : make_backend(config);
        auto gopts = options.hooks.gateway;
        gopts.max_in_flight = std::max<std::size_t>(gopts.max_in_flight, config.jobs);
        llm::Gateway gateway(backend, gopts);
        if (options.hooks.request_hook) gateway.set_request_hook(options.hooks.request_hook);

        fs::create_directories(config.output_dir);
        bool resuming = false;
        if (options.resume && fs::exists(config.output_dir / "checkpoint.json")) {
            auto cp = json::parse(read_file(config.output_dir / "checkpoint.json"), nullptr, false);
            if (cp.is_discarded() || cp.value("schema", "") != kCheckpointSchema) throw FatalError("unreadable checkpoint");
            if (cp.value("config", "") != resume_key(config)) throw FatalError("configuration changed since the checkpoint");
            resuming = true;
        } else {
            if (options.resume) spdlog::warn("no checkpoint in {}; starting fresh", config.output_dir.string());
            clear_outputs(config.output_dir);
        }
        RunLog log(config.output_dir / "run.log");
        write_file(config.output_dir / "config.ini", snapshot(config));

        auto templates = config.templates_dir ? ctx::PromptTemplates::load(*config.templates_dir) : ctx::PromptTemplates::defaults();

        auto repo = c::parse_c_repo(config.c_root, {{".c", ".h"}, config.jobs});
        trace.ran("parse", std::to_string(repo.units().size()) + " units in " + std::to_string(repo.files().size()) + " files");
        auto graph = c::build_call_graph(repo);
        auto order = c::topological_order(graph);
        trace.ran("graph", std::to_string(graph.edges.size()) + " edges, " + std::to_string(order.levels.size()) + " levels");
        write_file(config.output_dir / "graph.tsv", c::dump_graph(graph, order));

        pool::DependencyPool pool;
        if (config.plain_deps) trace.skipped("pool", "plain-deps");
        else if (!config.pool_root) trace.skipped("pool", "no pool root");
        else {
            pool = pool::build_pool(*config.pool_root);
            trace.ran("pool", std::to_string(pool.size()) + " entries");
        }

        std::unique_ptr<align::Embedder> embedder;
        align::VectorIndex index;
        bool index_ok = false;
        bool align_enabled = false;
        if (config.plain_deps) trace.skipped("align", "plain-deps");
        else if (pool.empty()) trace.skipped("align", "empty pool");
        else {
            embedder = make_embedder(config);
            try {
                index = align::VectorIndex(pool, *embedder);
                index_ok = true;
            } catch (const align::EmbeddingUnavailable& e) {
                spdlog::warn("embedding index unavailable ({}); aligning by name", e.what());
            }
            align_enabled = true;
            trace.ran("align", index_ok ? embedder->name() + " embeddings, k=" + std::to_string(config.top_k)
                                        : std::string("name matching"));
        }

        if (config.plain_deps) trace.skipped("bridge", "plain-deps");
        else trace.ran("bridge");
        trace.ran("translate");
        if (config.compile_iters == 0) trace.skipped("compile-repair", "compile_iters=0");
        else trace.ran("compile-repair", "budget " + std::to_string(config.compile_iters));
        if (config.consistency_iters == 0) trace.skipped("consistency", "consistency_iters=0");
        else trace.ran("consistency", "budget " + std::to_string(config.consistency_iters));

        RunState st;
        st.config = &config;
        st.repo = &repo;
        st.graph = &graph;
        st.order = &order;
        st.pool = &pool;
        st.index = index_ok ? &index : nullptr;
        st.embedder = embedder.get();
        st.align_enabled = align_enabled;
        st.gateway = &gateway;
        st.templates = &templates;
        st.toolchain = topts;

        auto levels = plan_batches(graph, order);
        for (const auto& level : levels)
            for (const auto& b : level)
                for (const auto& m : b.members) st.batch_of[m] = b.id;

        std::size_t start_level = 0;
        if (resuming) {
            auto cp = json::parse(read_file(config.output_dir / "checkpoint.json"));
            start_level = cp.at("levels_done").get<std::size_t>();
            std::map<std::string, refine::TranslationRecord> saved;
            for (auto& r : load_records(config.output_dir)) saved[r.unit_id] = std::move(r);
            for (std::size_t l = 0; l < std::min(start_level, levels.size()); ++l) {
                for (const auto& b : levels[l]) {
                    auto it = saved.find(b.id);
                    if (it == saved.end()) throw FatalError("checkpoint is missing the record of " + b.id);
                    store_record(st, b, std::move(it->second));
                }
            }
            trace.ran("resume", "from level " + std::to_string(start_level));
        }

        fs::create_directories(config.output_dir / "records");
        std::size_t levels_done = start_level;
        for (std::size_t l = start_level; l < levels.size(); ++l) {
            if (config.max_levels && l - start_level >= *config.max_levels) break;
            const auto& batches = levels[l];
            std::vector<refine::TranslationRecord> out(batches.size());
            std::atomic<std::size_t> next{0};
            std::exception_ptr failure;
            std::mutex failure_mu;
            auto worker = [&] {
                for (auto i = next++; i < batches.size(); i = next++) {
                    try {
                        out[i] = translate_batch(batches[i], st);
                    } catch (...) {
                        std::lock_guard lock(failure_mu);
                        if (!failure) failure = std::current_exception();
                    }
                }
            };
            auto n_threads = std::min(config.jobs, batches.size());
            if (n_threads <= 1) {
                worker();
            } else {
                std::vector<std::jthread> threads;
                for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
            }
            if (failure) std::rethrow_exception(failure);

            // barrier: the level's translations become visible to the next level
            for (std::size_t i = 0; i < batches.size(); ++i) {
                write_file(config.output_dir / "records" / (sanitize_id(batches[i].id) + ".json"),
                           record_to_json(out[i]).dump(2) + "\n");
                store_record(st, batches[i], std::move(out[i]));
            }
            levels_done = l + 1;
            write_checkpoint(config.output_dir, config, levels_done, levels.size());
            spdlog::info("level {} of {} done", levels_done, levels.size());
        }
        res.complete = levels_done == levels.size();
        if (!res.complete) write_checkpoint(config.output_dir, config, levels_done, levels.size());

        for (auto& [id, rec] : st.done) res.records.push_back(rec);
        res.gateway_calls = gateway.calls();

        std::vector<metrics::SourceText> sources;
        fs::create_directories(config.output_dir / "rust");
        for (const auto& r : res.records) {
            if (r.final_code.empty()) continue;
            auto name = "rust/" + sanitize_id(r.unit_id) + ".rs";
            write_file(config.output_dir / name, r.final_code + "\n");
            sources.push_back({name, r.final_code});
        }
        trace.ran("score", "G=" + std::to_string(config.candidates));
        res.report = metrics::build_report(run_name(config.c_root), unit_results(res.records), sources);
        if (!res.complete)
            res.report.warnings.push_back("incomplete run: " + std::to_string(levels_done) + " of " +
                                          std::to_string(levels.size()) + " levels");
        write_file(config.output_dir / "report.json", metrics::to_json(res.report).dump(2) + "\n");
        write_file(config.output_dir / "summary.txt", metrics::summary_table({res.report}));
        trace.ran("report");
        write_file(config.output_dir / "trace.txt", trace.text());

        bool all_ok = std::all_of(res.records.begin(), res.records.end(),
                                  [](const auto& r) { return r.status != refine::Status::Failed; });
        res.exit_code = res.complete && all_ok ? kAllCompiled : kPartial;
    } catch (const FatalError& e) {
        res.error = e.what();
        res.exit_code = kFatal;
    } catch (const ContractViolation& e) {
        res.error = e.what();
        res.exit_code = kFatal;
    } catch (const std::exception& e) {
        res.error = std::string("unexpected error: ") + e.what();
        res.exit_code = kFatal;
    }
    if (res.exit_code == kFatal) {
        spdlog::error("{}", res.error);
        std::error_code ec;
        if (fs::is_directory(config.output_dir, ec)) {
            try {
                write_file(config.output_dir / "trace.txt", trace.text() + "fatal: " + res.error + "\n");
            } catch (const std::exception&) {
            }
        }
    }
    return res;
}

// ---- evaluate ----

BenchmarkSpec load_benchmark_spec(const fs::path& path) {
    if (!fs::exists(path)) throw FatalError("benchmark spec not found: " + path.string());
    auto j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw FatalError("benchmark spec is not a JSON object: " + path.string());
    BenchmarkSpec spec;
    spec.name = j.value("name", path.stem().string());
    if (j.contains("units") && j["units"].is_object()) {
        for (const auto& [id, u] : j["units"].items()) {
            BenchmarkUnit b;
            b.tests = u.value("tests", "");
            b.reference = u.value("reference", "");
            spec.units[id] = std::move(b);
        }
    }
    return spec;
}

EvaluateResult run_evaluate(const RunConfig& config, const std::vector<fs::path>& run_dirs,
                            const std::vector<BenchmarkSpec>& specs) {
    EvaluateResult res;
    try {
        if (run_dirs.empty()) throw FatalError("no run directories to evaluate");
        if (specs.size() != 1 && specs.size() != run_dirs.size())
            throw FatalError("give one benchmark spec, or one per run directory");
        for (const auto& s : specs)
            if (s.units.empty()) throw FatalError("benchmark spec " + s.name + " lists no units");

        tc::ToolchainOptions topts;
        topts.rustc = config.rustc;
        topts.cargo = config.cargo;
        topts.timeout = config.compile_timeout;
        bool any_tests = std::any_of(specs.begin(), specs.end(), [](const BenchmarkSpec& s) {
            return std::any_of(s.units.begin(), s.units.end(), [](const auto& u) { return !u.second.tests.empty(); });
        });
        if (any_tests) tc::preflight(topts);

        for (std::size_t i = 0; i < run_dirs.size(); ++i) {
            const auto& dir = run_dirs[i];
            const auto& spec = specs.size() == 1 ? specs.front() : specs[i];
            auto cp_path = dir / "checkpoint.json";
            if (!fs::exists(cp_path)) throw FatalError("not a run directory: " + dir.string());
            auto cp = json::parse(read_file(cp_path), nullptr, false);
            if (cp.is_discarded() || !cp.value("complete", false)) throw FatalError("incomplete run: " + dir.string());

            auto records = load_records(dir);
            std::map<std::string, const refine::TranslationRecord*> by_id;
            for (const auto& r : records) by_id[r.unit_id] = &r;

            std::vector<metrics::UnitResult> units;
            std::vector<metrics::SourceText> sources;
            for (const auto& r : records) {
                if (!r.final_code.empty()) sources.push_back({"rust/" + sanitize_id(r.unit_id) + ".rs", r.final_code});
                tc::Scaffold scaffold;
                for (const auto& s : r.scaffold_units) {
                    auto it = by_id.find(s);
                    if (it == by_id.end()) throw FatalError("record " + r.unit_id + " references unknown unit " + s);
                    scaffold.prior_units.push_back(s);
                    scaffold.prior_code.push_back(it->second->final_code);
                }
                std::size_t n_err = r.attempts.empty() ? 0 : r.attempts[r.final_attempt].report.n_err;
                for (const auto& m : r.members) {
                    metrics::UnitResult u;
                    u.unit_id = m;
                    u.status = r.status;
                    u.n_err = n_err;
                    auto it = spec.units.find(m);
                    if (it != spec.units.end()) {
                        const auto& b = it->second;
                        if (!b.reference.empty()) u.codebleu = r.final_code.empty() ? 0.0 : score::codebleu(r.final_code, b.reference).total;
                        if (!b.tests.empty()) {
                            if (r.status == refine::Status::Failed) {
                                u.tests_passed = false;
                                u.note = "not compiled";
                            } else {
                                auto t = tc::run_unit_tests(r.final_code, scaffold, b.tests, topts);
                                u.tests_passed = t.all_passed();
                                if (t.harness_error) u.note = "harness error: " + t.note;
                                else u.note = std::to_string(t.passed) + "/" + std::to_string(t.total()) + " tests passed";
                            }
                        }
                    }
                    units.push_back(std::move(u));
                }
            }
            std::sort(units.begin(), units.end(), [](const auto& a, const auto& b) { return a.unit_id < b.unit_id; });
            auto report = metrics::build_report(spec.name, std::move(units), sources);
            write_file(dir / "evaluation.json", metrics::to_json(report).dump(2) + "\n");
            write_file(dir / "evaluation.txt", metrics::summary_table({report}));
            res.reports.push_back(std::move(report));
        }
        if (res.reports.size() > 1) res.reports.push_back(metrics::aggregate(res.reports));
        res.exit_code = std::all_of(res.reports.begin(), res.reports.end(), [](const auto& r) {
                            return std::all_of(r.per_unit.begin(), r.per_unit.end(),
                                               [](const auto& u) { return u.status != refine::Status::Failed; });
                        })
                            ? kAllCompiled
                            : kPartial;
    } catch (const FatalError& e) {
        res.error = e.what();
        res.exit_code = kFatal;
    } catch (const ContractViolation& e) {
        res.error = e.what();
        res.exit_code = kFatal;
    }
    return res;
}

} // namespace c2r::pipeline
