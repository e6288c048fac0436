#include "c2r/c_analyzer.hpp"
#include "c2r/call_graph.hpp"
#include "c2r/context_builder.hpp"
#include "c2r/tokens.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace fs = std::filesystem;
using namespace c2r;
using namespace c2r::ctx;

namespace {

const fs::path kRepo = fs::path(C2R_FIXTURES) / "c_repo";

struct Synthetic {
    c::FunctionUnit unit;
    c::DependencySet deps;
    pool::DependencyPool pool;
    align::AlignedContext aligned;
    c::TranslationOrder order;
    TranslationStore store;

    ContextInputs inputs() const {
        ContextInputs in;
        in.units = {&unit};
        in.deps = &deps;
        in.aligned = &aligned;
        in.pool = &pool;
        in.order = &order;
        in.store = &store;
        in.bridge_docstring = "Fills a buffer.";
        return in;
    }
};

std::string words(int n, const std::string& w) {
    std::string out;
    for (int i = 0; i < n; ++i) out += w + std::to_string(i) + " ";
    return out;
}

Synthetic synthetic() {
    Synthetic s;
    s.unit.id = "a.c::fill";
    s.unit.name = "fill";
    s.unit.file = "a.c";
    s.unit.signature = "void fill(struct buf *b)";
    s.unit.source = "void fill(struct buf *b) { b->len = MAX; g = 1; }";
    s.deps.unit_id = s.unit.id;
    s.deps.headers = {"a.h"};
    s.deps.records = {{"buf", "a.h", "struct buf { int len; };"},
                      {"huge", "a.h", "struct huge { int a; char b[4]; /* " + words(30, "pad") + "*/ };"}};
    s.deps.globals = {{"g", "a.c", "int g;"}};
    s.deps.macros = {{"MAX", "a.h", "#define MAX 8"}};
    s.pool = pool::build_pool(std::vector<pool::PoolSource>{
        {"src/lib.rs", "pub struct Buf { pub len: usize }\n"
                       "pub const MAX: usize = 8;\n"
                       "pub fn len(b: &Buf) -> usize { b.len }\n"
                       "/// Does a lot.\npub fn big(x: i32) -> i32 { " + words(30, "x") + "}\n"}});
    s.aligned.matches = {{"record:buf", "struct:Buf", 0.9},
                         {"record:huge", "function:big", 0.7},
                         {"record:buf", "function:len", 0.5},
                         {"macro:MAX", "const:MAX", 0.5}};
    s.order.levels = {{s.unit.id}};
    s.order.level_of = {{s.unit.id, 0}};
    return s;
}

ContextOptions small_threshold(std::size_t budget) {
    ContextOptions o;
    o.verbatim_threshold = 20;
    o.budget = budget;
    return o;
}

const std::vector<std::string> kFullDropOrder = {
    "rust const:MAX", "rust function:len", "summary big", "rust struct:Buf",
    "summary huge",   "c macro MAX",       "c global g",  "c record buf",
};

} // namespace

TEST(Templates, RenderReplacesKnownPlaceholdersOnly) {
    EXPECT_EQ(render("{A} and {B} {A} { x }", {{"A", "1"}}), "1 and {B} 1 { x }");
    EXPECT_EQ(render("{A", {{"A", "1"}}), "{A");
    auto d = PromptTemplates::defaults();
    EXPECT_NE(d.translate.find("{SOURCE}"), std::string::npos);
    EXPECT_LT(d.translate.find("{BRIDGE}"), d.translate.find("{SOURCE}"));
}

TEST(Templates, DirectoryOverrides) {
    TempDir dir("c2r-test");
    write_file(dir.path() / "repair.txt", "fix {CODE}");
    auto t = PromptTemplates::load(dir.path());
    EXPECT_EQ(t.repair, "fix {CODE}");
    EXPECT_EQ(t.translate, PromptTemplates::defaults().translate);
    EXPECT_THROW(PromptTemplates::load(dir.path() / "nope"), FatalError);
}

TEST(Summary, MechanicalMembers) {
    EXPECT_EQ(mechanical_summary("record", "huge", "struct huge { int a; char b[4]; };", false),
              "record huge: members a, b");
    EXPECT_EQ(mechanical_summary("struct", "Buf", "pub struct Buf { pub len: usize, cap: u8 }", true),
              "struct Buf: members len, cap");
    EXPECT_EQ(mechanical_summary("macro", "M", "#define M 1", false), "macro M");
}

TEST(Merge, BatchCalleesInsideAreRemoved) {
    c::DependencySet a, b;
    a.callees = {"x.c::b", "x.c::h"};
    a.externals = {"printf"};
    b.callees = {"x.c::a", "x.c::h"};
    b.externals = {"printf", "puts"};
    b.globals = {{"g", "x.c", "int g;"}};
    auto m = merge_dependencies({a, b}, {"x.c::a", "x.c::b"});
    EXPECT_EQ(m.unit_id, "x.c::a+x.c::b");
    EXPECT_EQ(m.callees, (std::vector<std::string>{"x.c::h"}));
    EXPECT_EQ(m.externals, (std::vector<std::string>{"printf", "puts"}));
    EXPECT_EQ(m.globals.size(), 1u);
}

TEST(Context, GranularityFollowsThreshold) {
    auto s = synthetic();
    auto ctx = build_context(s.inputs(), small_threshold(100000));
    EXPECT_TRUE(ctx.dropped.empty());
    std::vector<std::string> verbatim, summarized;
    for (const auto& d : ctx.verbatim_deps) verbatim.push_back(d.label);
    for (const auto& d : ctx.summarized_deps) summarized.push_back(d.name);
    EXPECT_EQ(verbatim, (std::vector<std::string>{"c record buf", "c global g", "c macro MAX", "rust struct:Buf",
                                                  "rust const:MAX", "rust function:len"}));
    EXPECT_EQ(summarized, (std::vector<std::string>{"huge", "big"}));
    EXPECT_EQ(ctx.summarized_deps[1].docstring, "Does a lot.");
    EXPECT_EQ(ctx.token_estimate, estimate_tokens(render_translate_prompt(ctx, PromptTemplates::defaults())));
    for (const auto& d : ctx.verbatim_deps) EXPECT_LE(estimate_tokens(d.text), 20u);
}

TEST(Context, BridgeDocstringComesFirst) {
    auto s = synthetic();
    auto ctx = build_context(s.inputs(), small_threshold(100000));
    auto prompt = render_translate_prompt(ctx, PromptTemplates::defaults());
    EXPECT_TRUE(prompt.starts_with("/// Fills a buffer.\n"));
    EXPECT_LT(prompt.find("Fills a buffer."), prompt.find(s.unit.source));
    EXPECT_NE(prompt.find("// includes: a.h"), std::string::npos);
}

TEST(Context, DropOrderUnderTightBudget) {
    auto s = synthetic();
    auto in = s.inputs();
    auto bare_deps = s.deps;
    bare_deps.records.clear();
    bare_deps.globals.clear();
    bare_deps.macros.clear();
    auto bare_in = in;
    bare_in.deps = &bare_deps;
    bare_in.aligned = nullptr;
    auto floor = build_context(bare_in, small_threshold(100000)).token_estimate;

    // at the floor every optional piece is gone; one below, nothing fits
    auto all_dropped = build_context(in, small_threshold(floor));
    EXPECT_EQ(all_dropped.dropped, kFullDropOrder);
    EXPECT_TRUE(all_dropped.verbatim_deps.empty());
    EXPECT_THROW(build_context(in, small_threshold(floor - 1)), ContextOverflow);
}

// For every budget the drops are the shortest prefix of the fixed order that fits.
TEST(ContextProperty, DropsAreMinimalPrefix) {
    auto s = synthetic();
    auto in = s.inputs();
    auto full = build_context(in, small_threshold(100000)).token_estimate;
    std::size_t previous = kFullDropOrder.size() + 1;
    for (std::size_t budget = 1; budget <= full + 5; ++budget) {
        PromptContext ctx;
        try {
            ctx = build_context(in, small_threshold(budget));
        } catch (const ContextOverflow&) {
            continue;
        }
        EXPECT_LE(ctx.token_estimate, budget);
        ASSERT_LE(ctx.dropped.size(), kFullDropOrder.size());
        EXPECT_TRUE(std::equal(ctx.dropped.begin(), ctx.dropped.end(), kFullDropOrder.begin()));
        EXPECT_LE(ctx.dropped.size(), previous);
        previous = ctx.dropped.size();
    }
    EXPECT_EQ(previous, 0u);
}

TEST(Context, PlainDepsKeepsOnlyCSnippets) {
    auto s = synthetic();
    auto o = small_threshold(100000);
    o.plain_deps = true;
    auto ctx = build_context(s.inputs(), o);
    EXPECT_TRUE(ctx.summarized_deps.empty());
    ASSERT_EQ(ctx.verbatim_deps.size(), 4u);
    for (const auto& d : ctx.verbatim_deps) EXPECT_TRUE(d.entry_id.empty());
}

TEST(Context, MissingCalleeIsOrderingViolation) {
    auto s = synthetic();
    s.deps.callees = {"b.c::g"};
    s.order.level_of["b.c::g"] = 0;
    EXPECT_THROW(build_context(s.inputs(), small_threshold(100000)), OrderingViolation);
    s.store.put({"b.c::g", "fn g() {}", true, 0});
    EXPECT_THROW(build_context(s.inputs(), small_threshold(100000)), OrderingViolation); // same level
    s.order.level_of[s.unit.id] = 1;
    auto ctx = build_context(s.inputs(), small_threshold(100000));
    ASSERT_EQ(ctx.prior_translations.size(), 1u);
    EXPECT_EQ(ctx.prior_translations[0].code, "fn g() {}");
    EXPECT_THROW(build_context(ContextInputs{}, ContextOptions{}), ContractViolation);
}

TEST(Context, FixtureRepoPriorTranslations) {
    auto repo = c::parse_c_repo(kRepo);
    auto graph = c::build_call_graph(repo);
    auto order = c::topological_order(graph);
    auto deps = c::extract_dependency_set("main.c::total", repo, graph);
    TranslationStore store;
    store.put({"geom.c::norm1", "pub fn norm1() {}", true, 1});
    store.put({"util.c::scale", "pub fn scale() {}", false, 1});
    ContextInputs in;
    const auto* unit = repo.find_unit("main.c::total");
    ASSERT_NE(unit, nullptr);
    in.units = {unit};
    in.deps = &deps;
    in.order = &order;
    in.store = &store;
    auto ctx = build_context(in, ContextOptions{});
    EXPECT_EQ(ctx.unit_id, "main.c::total");
    ASSERT_EQ(ctx.prior_translations.size(), 2u);
    auto prompt = render_translate_prompt(ctx, PromptTemplates::defaults());
    EXPECT_NE(prompt.find("// util.c::scale (unverified)"), std::string::npos);
    EXPECT_NE(prompt.find("struct point"), std::string::npos);
    EXPECT_NE(prompt.find("int g_calls = 0;"), std::string::npos);
}

TEST(Bridge, ReplyOrMechanicalFallback) {
    c::FunctionUnit u;
    u.id = "a.c::f";
    u.signature = "int f(int x)";
    u.source = "int f(int x) { return g(x); }";
    c::DependencySet deps;
    deps.callees = {"a.c::g"};
    deps.externals = {"abs"};
    auto templates = PromptTemplates::defaults();

    auto ok = std::make_shared<llm::MockBackend>(
        llm::MockBackend::parse_script(R"([{"tag": "BRIDGE", "response": "  Doubles x.\n"}])"));
    llm::Gateway g1(ok);
    auto doc = request_bridge_docstring({&u}, deps, g1, templates, u.id);
    EXPECT_EQ(doc.text, "Doubles x.");
    EXPECT_FALSE(doc.fallback);
    auto sent = ok->history().at(0).prompt;
    EXPECT_NE(sent.find("Signature: int f(int x)"), std::string::npos);
    EXPECT_NE(sent.find("Calls: a.c::g, abs"), std::string::npos);

    auto down = std::make_shared<llm::MockBackend>(
        llm::MockBackend::parse_script(R"([{"tag": "BRIDGE", "fail": true}])"));
    llm::GatewayOptions o;
    o.retries = 0;
    llm::Gateway g2(down, o);
    auto fb = request_bridge_docstring({&u}, deps, g2, templates, u.id);
    EXPECT_TRUE(fb.fallback);
    EXPECT_EQ(fb.text, "int f(int x)\nCalls: a.c::g, abs");

    auto blank = std::make_shared<llm::MockBackend>(
        llm::MockBackend::parse_script(R"([{"tag": "BRIDGE", "response": "   "}])"));
    llm::Gateway g3(blank);
    EXPECT_TRUE(request_bridge_docstring({&u}, deps, g3, templates, u.id).fallback);
}
