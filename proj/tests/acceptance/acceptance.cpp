// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include "c2r/call_graph.hpp"
#include "c2r/config.hpp"
#include "c2r/metrics.hpp"
#include "c2r/pipeline.hpp"
#include "c2r/scoring.hpp"
#include "c2r/toolchain.hpp"
#include "c2r/util/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace c2r;

namespace {

const fs::path kFixtures = C2R_FIXTURES;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

struct Criterion {
    std::string name;
    double max_seconds; // 0: no limit
    std::function<Outcome()> run;
};

std::string num(double v) {
    std::ostringstream s;
    s.precision(12);
    s << v;
    return s.str();
}

// --- 1 ---------------------------------------------------------------------

Outcome aggregation() {
    Outcome o;
    metrics::BenchmarkReport dc{"DCBench", 125, 51.2, 36.8};
    metrics::BenchmarkReport imc{"IMCBench", 20, 95.0, 70.0};
    auto total = metrics::aggregate({dc, imc});
    o.require(std::abs(total.csr - 57.2) <= 0.05, "TOTAL CSR " + num(total.csr));
    o.require(std::abs(total.ca - 41.4) <= 0.05, "TOTAL CA " + num(total.ca));
    o.require(total.n_units == 145, "unit count");
    o.detail = o.pass ? "CSR " + format1(total.csr) + ", CA " + format1(total.ca) : o.detail;
    return o;
}

// --- 2 ---------------------------------------------------------------------

Outcome reward_math() {
    Outcome o;
    o.require(score::comp_reward(0) == 1.0 && score::comp_reward(1) == 0.5 && score::comp_reward(9) == 0.1,
              "comp_reward at {0,1,9}");

    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> size(2, 64);
    std::uniform_real_distribution<double> reward(0.0, 2.0);
    std::size_t degenerate = 0;
    for (int g = 0; g < 1000; ++g) {
        std::vector<double> r(static_cast<std::size_t>(size(rng)));
        if (g % 10 == 0) {
            std::fill(r.begin(), r.end(), reward(rng)); // constant group
        } else {
            for (auto& x : r) x = reward(rng);
        }
        auto s = score::group_advantages(r);
        double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
        double var = 0.0;
        for (double x : r) var += (x - mean) * (x - mean);
        double sd = std::sqrt(var / static_cast<double>(r.size()));
        if (sd <= score::kAdvantageEpsilon) {
            ++degenerate;
            o.require(std::all_of(s.advantages.begin(), s.advantages.end(), [](double a) { return a == 0.0; }),
                      "degenerate group not all zero");
            continue;
        }
        double am = std::accumulate(s.advantages.begin(), s.advantages.end(), 0.0) / static_cast<double>(r.size());
        double av = 0.0;
        for (double a : s.advantages) av += (a - am) * (a - am);
        double asd = std::sqrt(av / static_cast<double>(r.size()));
        o.require(std::abs(am) < 1e-9, "advantage mean " + num(am));
        o.require(std::abs(asd - 1.0) < 1e-6, "advantage std " + num(asd));
    }

    const int n = 10001; // log-spaced over [1e-6, 1e6], centre point exactly 1
    std::size_t zeros = 0;
    for (int i = 0; i < n; ++i) {
        double ratio = std::pow(10.0, -6.0 + 12.0 * i / (n - 1));
        double kl = score::kl_estimate(ratio);
        o.require(kl >= 0.0, "negative KL at " + num(ratio));
        if (std::abs(kl) < 1e-12) {
            ++zeros;
            o.require(ratio == 1.0, "KL vanishes at " + num(ratio));
        }
    }
    o.require(zeros == 1, "KL zero count " + std::to_string(zeros));
    if (o.pass) o.detail = "1000 groups (" + std::to_string(degenerate) + " degenerate), " + std::to_string(n) + " KL points";
    return o;
}

// --- 3 ---------------------------------------------------------------------

Outcome surrogate() {
    Outcome o;
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> size(2, 64);
    std::uniform_real_distribution<double> ratio(0.8, 1.2), kl_ratio(0.5, 2.0), reward(0.0, 2.0), beta(0.0, 0.1);
    double worst = 0.0;
    for (int g = 0; g < 500; ++g) {
        auto n = static_cast<std::size_t>(size(rng));
        std::vector<double> rho(n), kl(n), r(n);
        for (std::size_t i = 0; i < n; ++i) rho[i] = ratio(rng), kl[i] = kl_ratio(rng), r[i] = reward(rng);
        auto adv = score::group_advantages(r).advantages;
        double b = beta(rng);
        double clipped = score::grpo_surrogate(rho, adv, kl, b);
        double unclipped = score::grpo_surrogate(rho, adv, kl, b, 10.0);
        o.require(std::abs(clipped - unclipped) <= 1e-12, "clip changed the objective in group " + std::to_string(g));

        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double c = std::min(std::max(rho[i], 1.0 - score::kClipEpsilon), 1.0 + score::kClipEpsilon);
            double term = std::min(rho[i] * adv[i], c * adv[i]);
            double k = kl[i] - std::log(kl[i]) - 1.0;
            sum += term - b * k;
        }
        double brute = sum / static_cast<double>(n);
        worst = std::max(worst, std::abs(brute - clipped));
        o.require(std::abs(brute - clipped) <= 1e-12, "brute-force mismatch in group " + std::to_string(g));
    }
    if (o.pass) o.detail = "500 groups, max deviation " + num(worst);
    return o;
}

// --- 4 ---------------------------------------------------------------------

Digraph random_dag(std::mt19937& rng, std::size_t n, double p) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::bernoulli_distribution coin(p);
    Digraph g(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (coin(rng)) g.add_edge(perm[i], perm[j]);
    return g;
}

Digraph random_digraph(std::mt19937& rng, std::size_t n, double p) {
    std::bernoulli_distribution coin(p);
    Digraph g(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && coin(rng)) g.add_edge(i, j);
    return g;
}

bool has_cycle_exhaustive(const std::vector<std::vector<std::size_t>>& succ) {
    std::function<bool(std::size_t, std::size_t, std::vector<bool>&)> walk = [&](std::size_t start, std::size_t v,
                                                                              std::vector<bool>& on_path) {
        for (auto w : succ[v]) {
            if (w == start) return true;
            if (on_path[w]) continue;
            on_path[w] = true;
            if (walk(start, w, on_path)) return true;
            on_path[w] = false;
        }
        return false;
    };
    for (std::size_t s = 0; s < succ.size(); ++s) {
        std::vector<bool> on_path(succ.size(), false);
        on_path[s] = true;
        if (walk(s, s, on_path)) return true;
    }
    return false;
}

bool kahn_consumes_all(const std::vector<std::vector<std::size_t>>& succ) {
    std::vector<std::size_t> indeg(succ.size(), 0);
    for (const auto& s : succ)
        for (auto b : s) ++indeg[b];
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < indeg.size(); ++i)
        if (!indeg[i]) ready.push_back(i);
    std::size_t seen = 0;
    while (!ready.empty()) {
        auto v = ready.back();
        ready.pop_back();
        ++seen;
        for (auto b : succ[v])
            if (--indeg[b] == 0) ready.push_back(b);
    }
    return seen == succ.size();
}

Outcome graph_suite() {
    Outcome o;
    std::mt19937 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 1 + rng() % 50;
        auto g = random_dag(rng, n, 0.1);
        auto c = condense(g);
        o.require(c.members.size() == n, "DAG condensed to fewer components");
        auto levels = component_levels(c);
        // order check: every callee strictly before its caller, levels minimal
        for (std::size_t v = 0; v < n; ++v) {
            std::size_t want = 0;
            for (auto w : g.succ[v]) {
                o.require(levels[c.component_of[v]] > levels[c.component_of[w]], "edge violates order");
                want = std::max(want, levels[c.component_of[w]] + 1);
            }
            o.require(levels[c.component_of[v]] == want, "level not minimal");
        }
    }
    std::size_t exhaustive = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = trial % 2 ? 1 + rng() % 12 : 13 + rng() % 28;
        auto g = random_digraph(rng, n, n <= 12 ? 0.2 : 0.06);
        auto c = condense(g);
        if (n <= 12) {
            ++exhaustive;
            o.require(!has_cycle_exhaustive(c.succ), "cycle in condensation (exhaustive)");
        }
        o.require(kahn_consumes_all(c.succ), "cycle in condensation (Kahn)");
        auto levels = component_levels(c);
        for (std::size_t a = 0; a < c.succ.size(); ++a)
            for (auto b : c.succ[a]) o.require(levels[a] > levels[b], "component levels violate an edge");
    }
    if (o.pass) o.detail = "100 DAGs, 100 digraphs (" + std::to_string(exhaustive) + " exhaustive)";
    return o;
}

// --- 5-8 ---------------------------------------------------------------------

RunConfig repo_config(const fs::path& out, std::size_t compile_iters, std::size_t consistency_iters) {
    RunConfig c;
    c.c_root = kFixtures / "c_repo";
    c.pool_root = kFixtures / "rust_pool";
    c.output_dir = out;
    c.mock_script = kFixtures / "mock" / "repo_fix_on_diagnostics.json";
    c.compile_iters = compile_iters;
    c.consistency_iters = consistency_iters;
    return c;
}

Outcome end_to_end() {
    Outcome o;
    TempDir dir("c2r-accept");
    auto full = pipeline::run_translate(repo_config(dir.path() / "full", 3, 2));
    o.require(full.exit_code == pipeline::kAllCompiled, "budgets (3,2) exit " + std::to_string(full.exit_code) + " " + full.error);
    o.require(full.report.csr == 100.0, "budgets (3,2) CSR " + num(full.report.csr));
    o.require(full.gateway_calls == 18, "budgets (3,2) calls " + std::to_string(full.gateway_calls));
    auto none = pipeline::run_translate(repo_config(dir.path() / "none", 0, 0));
    o.require(none.report.csr <= 40.0, "budgets (0,0) CSR " + num(none.report.csr));
    o.require(none.gateway_calls == 10, "budgets (0,0) calls " + std::to_string(none.gateway_calls));
    if (o.pass)
        o.detail = "(3,2): CSR " + format1(full.report.csr) + ", 18 calls; (0,0): CSR " + format1(none.report.csr) + ", 10 calls";
    return o;
}

Outcome budget_sweep() {
    Outcome o;
    TempDir dir("c2r-accept");
    std::string shape;
    for (std::size_t c = 0; c <= 4; ++c) {
        RunConfig cfg;
        cfg.c_root = kFixtures / "c_single";
        cfg.output_dir = dir.path() / ("c" + std::to_string(c));
        cfg.mock_script = kFixtures / "mock" / "single_two_fixes.json";
        cfg.compile_iters = c;
        cfg.consistency_iters = 0;
        auto r = pipeline::run_translate(cfg);
        bool ok = r.exit_code == pipeline::kAllCompiled && r.report.csr == 100.0;
        o.require(r.exit_code != pipeline::kFatal, "fatal at budget " + std::to_string(c) + ": " + r.error);
        o.require(ok == (c >= 2), "budget " + std::to_string(c) + (ok ? " succeeded" : " failed"));
        shape += ok ? '1' : '0';
    }
    o.detail = "success by compile budget 0..4: " + shape + (o.pass ? "" : "; " + o.detail);
    return o;
}

Outcome ablations() {
    Outcome o;
    TempDir dir("c2r-accept");
    struct Variant {
        std::string name;
        std::function<void(RunConfig&)> set;
        std::vector<std::string> skipped, ran;
    };
    std::vector<Variant> variants{
        {"Plain Deps", [](RunConfig& c) { c.plain_deps = true; }, {"pool", "align", "bridge"}, {"compile-repair", "consistency"}},
        {"w/o Compile", [](RunConfig& c) { c.compile_iters = 0; }, {"compile-repair"}, {"align", "consistency"}},
        {"w/o Consistency", [](RunConfig& c) { c.consistency_iters = 0; }, {"consistency"}, {"align", "compile-repair"}},
        {"w/o Repair", [](RunConfig& c) { c.compile_iters = c.consistency_iters = 0; }, {"compile-repair", "consistency"}, {"align"}},
    };
    for (std::size_t i = 0; i < variants.size(); ++i) {
        const auto& v = variants[i];
        auto cfg = repo_config(dir.path() / std::to_string(i), 3, 2);
        v.set(cfg);
        auto r = pipeline::run_translate(cfg);
        o.require(r.exit_code != pipeline::kFatal, v.name + ": " + r.error);
        auto trace = read_file(cfg.output_dir / "trace.txt");
        for (const auto& s : v.skipped)
            o.require(r.trace.was_skipped(s) && trace.find(s + " skipped") != std::string::npos, v.name + ": " + s + " not skipped");
        for (const auto& s : v.ran) o.require(r.trace.was_run(s), v.name + ": " + s + " did not run");
    }
    if (o.pass) o.detail = "4 variants";
    return o;
}

Outcome determinism() {
    Outcome o;
    TempDir dir("c2r-accept");
    auto a = pipeline::run_translate(repo_config(dir.path() / "a", 3, 2));
    auto b = pipeline::run_translate(repo_config(dir.path() / "b", 3, 2));
    o.require(a.complete && b.complete, "incomplete run");
    auto ra = read_file(dir.path() / "a" / "report.json");
    o.require(ra == read_file(dir.path() / "b" / "report.json"), "report.json differs");
    o.require(read_file(dir.path() / "a" / "summary.txt") == read_file(dir.path() / "b" / "summary.txt"), "summary.txt differs");
    if (o.pass) o.detail = "report.json identical (" + std::to_string(ra.size()) + " bytes)";
    return o;
}

// --- 9-10 --------------------------------------------------------------------

Outcome diagnostics() {
    Outcome o;
    tc::ToolchainOptions opts;
    auto undefined = tc::compile_unit(read_file(kFixtures / "rustc" / "undefined_symbol.rs"), {}, opts);
    o.require(!undefined.success && undefined.has_code("E0425"), "E0425 missing");
    auto two = tc::compile_unit(read_file(kFixtures / "rustc" / "two_errors.rs"), {}, opts);
    o.require(two.n_err == 2, "two-error fixture n_err=" + std::to_string(two.n_err));
    if (o.pass) o.detail = "E0425 reported, n_err=2";
    return o;
}

Outcome coverage_probe() {
    Outcome o;
    TempDir dir("c2r-accept");
    auto root = dir.path() / "crate";
    fs::copy(kFixtures / "coverage_crate", root, fs::copy_options::recursive);
    auto before = hash_tree(root, {"target"});
    std::vector<std::pair<std::string, bool>> expected{{"add", true}, {"Rect::area", true}, {"unused_sub", false}};
    for (const auto& [name, covered] : expected) {
        auto r = metrics::identify_test_coverage(root, name);
        o.require(!r.inconclusive && r.covered == covered, name + " misclassified");
        o.require(hash_tree(root, {"target"}) == before, "tree hash changed after probing " + name);
    }
    if (o.pass) o.detail = "3 functions classified, hash restored";
    return o;
}

} // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    std::vector<Criterion> criteria{
        {"aggregation oracle", 1, aggregation},
        {"reward math", 5, reward_math},
        {"surrogate equivalence", 5, surrogate},
        {"graph suite", 10, graph_suite},
        {"end-to-end mock pipeline", 60, end_to_end},
        {"budget sweep", 0, budget_sweep},
        {"ablation configurations", 0, ablations},
        {"determinism", 0, determinism},
        {"compiler diagnostics", 0, diagnostics},
        {"coverage probe", 0, coverage_probe},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        Outcome out;
        auto start = std::chrono::steady_clock::now();
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.max_seconds > 0 && secs >= c.max_seconds) {
            out.pass = false;
            out.detail += "; took " + num(secs) + " s, limit " + num(c.max_seconds) + " s";
        }
        if (!out.pass) ++failures;
        std::ostringstream t;
        t.precision(2);
        t << std::fixed << secs;
        std::cout << (out.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << c.name << ": " << out.detail << " [" << t.str()
                  << " s]\n";
    }
    return failures == 0 ? 0 : 1;
}
