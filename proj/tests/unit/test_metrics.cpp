#include "c2r/metrics.hpp"
#include "c2r/util/text.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace c2r;
using namespace c2r::metrics;
using refine::Status;

namespace {

std::vector<Status> statuses(std::size_t ok, std::size_t total) {
    std::vector<Status> s(total, Status::Failed);
    for (std::size_t i = 0; i < ok; ++i) s[i] = i % 2 ? Status::Functional : Status::Compiled;
    return s;
}

std::vector<UnitResult> units_with_tests(std::size_t passing, std::size_t total) {
    std::vector<UnitResult> out(total);
    for (std::size_t i = 0; i < total; ++i) {
        out[i].unit_id = "u" + std::to_string(i);
        out[i].status = Status::Compiled;
        out[i].tests_passed = i < passing;
    }
    return out;
}

BenchmarkReport summary_only(std::string name, std::size_t n, double csr, double ca) {
    BenchmarkReport r;
    r.name = std::move(name);
    r.n_units = n;
    r.csr = csr;
    r.ca = ca;
    return r;
}

const char* kUnsafeSample = R"(// comment
fn safe() -> i32 { 1 }

unsafe fn raw(p: *const i32) -> i32 {
    *p
}

fn wrap(p: *const i32) -> i32 {
    let v = unsafe {
        *p
    };
    v
}

/// doc
type F = unsafe fn(i32) -> i32;
)";

} // namespace

TEST(Csr, Percentages) {
    EXPECT_DOUBLE_EQ(compute_csr(statuses(64, 125)), 51.2);
    EXPECT_EQ(compute_csr(statuses(5, 5)), 100.0);
    EXPECT_EQ(compute_csr(statuses(0, 3)), 0.0);
    EXPECT_DOUBLE_EQ(compute_csr(statuses(2, 5)), 40.0);
    EXPECT_THROW(compute_csr(std::vector<Status>{}), ContractViolation);
}

TEST(Ca, PercentagesAndWarnings) {
    std::vector<std::string> w;
    EXPECT_DOUBLE_EQ(compute_ca(units_with_tests(14, 20), &w), 70.0);
    EXPECT_TRUE(w.empty());

    auto u = units_with_tests(2, 4);
    u[0].status = Status::Failed; // passing tests do not count for code that does not compile
    u[3].tests_passed.reset();
    EXPECT_DOUBLE_EQ(compute_ca(u, &w), 25.0);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_NE(w[0].find("1 unit(s) without tests"), std::string::npos);

    std::vector<UnitResult> none(3);
    w.clear();
    EXPECT_EQ(compute_ca(none, &w), 0.0);
    EXPECT_NE(w.at(0).find("no unit has tests"), std::string::npos);
    EXPECT_THROW(compute_ca({}), ContractViolation);
}

TEST(Aggregate, UnitWeightedTotals) {
    auto total = aggregate({summary_only("DCBench", 125, 51.2, 36.8), summary_only("IMCBench", 20, 95.0, 70.0)});
    EXPECT_EQ(total.name, "TOTAL");
    EXPECT_EQ(total.n_units, 145u);
    EXPECT_NEAR(round1(total.csr), 57.2, 0.05);
    EXPECT_NEAR(round1(total.ca), 41.4, 0.05);
    EXPECT_NEAR(total.csr, 8300.0 / 145.0, 1e-12);
    auto j = to_json(total);
    EXPECT_EQ(j["csr"], 57.2);
    EXPECT_EQ(j["ca"], 41.4);
}

TEST(Aggregate, SingleReportPassesThroughAndCodeBleuWeightsOnlyScored) {
    auto a = summary_only("a", 10, 50.0, 10.0);
    EXPECT_EQ(aggregate({a}), a);
    a.mean_codebleu = 0.5;
    a.warnings = {"w"};
    auto b = summary_only("b", 30, 100.0, 0.0);
    auto t = aggregate({a, b});
    ASSERT_TRUE(t.mean_codebleu);
    EXPECT_EQ(*t.mean_codebleu, 0.5);
    EXPECT_EQ(t.warnings, std::vector<std::string>{"a: w"});
    EXPECT_DOUBLE_EQ(t.csr, 87.5);
    EXPECT_THROW(aggregate({}), ContractViolation);
}

TEST(AggregateProperty, ConcatenationEqualsWeightedMean) {
    std::mt19937 rng(5);
    std::uniform_int_distribution<std::size_t> n(1, 200);
    for (int round = 0; round < 100; ++round) {
        std::size_t na = n(rng), nb = n(rng);
        std::size_t oka = std::uniform_int_distribution<std::size_t>(0, na)(rng);
        std::size_t okb = std::uniform_int_distribution<std::size_t>(0, nb)(rng);
        auto sa = statuses(oka, na), sb = statuses(okb, nb);
        auto all = sa;
        all.insert(all.end(), sb.begin(), sb.end());
        auto t = aggregate({summary_only("a", na, compute_csr(sa), 0), summary_only("b", nb, compute_csr(sb), 0)});
        EXPECT_NEAR(t.csr, compute_csr(all), 1e-9);
    }
}

TEST(Unsafe, HandCountedSample) {
    auto c = count_unsafe_lines(kUnsafeSample);
    EXPECT_EQ(c.code_lines, 11u);
    EXPECT_EQ(c.unsafe_lines, 3u);
    auto one = count_unsafe_lines("fn f(p: *const u8) -> u8 { unsafe { *p } }");
    EXPECT_EQ(one.code_lines, 1u);
    EXPECT_EQ(one.unsafe_lines, 1u);
    auto ext = count_unsafe_lines("unsafe extern \"C\" {\n    fn abs(x: i32) -> i32;\n}\nunsafe impl Send for X {}\n");
    EXPECT_EQ(ext.code_lines, 4u);
    EXPECT_EQ(ext.unsafe_lines, 3u);
    EXPECT_EQ(count_unsafe_lines("").code_lines, 0u);
}

// Blank lines and comments never change the counts.
TEST(UnsafeProperty, InvariantUnderCommentsAndBlankLines) {
    auto base = count_unsafe_lines(kUnsafeSample);
    auto lines = split_lines(kUnsafeSample);
    std::mt19937 rng(9);
    for (int round = 0; round < 50; ++round) {
        std::string text;
        for (const auto& l : lines) {
            int pick = std::uniform_int_distribution<int>(0, 3)(rng);
            if (pick == 0) text += "\n";
            if (pick == 1) text += "    // noise unsafe {\n";
            if (pick == 2) text += "/* block\n   comment */\n";
            text += l + "\n";
        }
        auto c = count_unsafe_lines(text);
        EXPECT_EQ(c.code_lines, base.code_lines);
        EXPECT_EQ(c.unsafe_lines, base.unsafe_lines);
    }
}

TEST(Unsafe, RatioExcludesUnlexableFiles) {
    std::vector<std::string> w;
    double r = unsafe_ratio({{"a.rs", kUnsafeSample}, {"b.rs", "fn g() {}\n"}, {"bad.rs", "let s = \"open"}}, &w);
    EXPECT_DOUBLE_EQ(r, 100.0 * 3 / 12);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_NE(w[0].find("bad.rs"), std::string::npos);
    EXPECT_EQ(unsafe_ratio({}), 0.0);
}

TEST(Report, BuildAndJsonRoundTrip) {
    std::vector<UnitResult> units = {
        {"a.c::f", Status::Functional, 0, 0.71234, true, ""},
        {"a.c::g", Status::Compiled, 0, std::nullopt, false, ""},
        {"a.c::h", Status::Failed, 3, 0.2, std::nullopt, "not compiled"},
    };
    auto r = build_report("demo", units, {{"f.rs", kUnsafeSample}});
    EXPECT_EQ(r.n_units, 3u);
    EXPECT_NEAR(r.csr, 200.0 / 3, 1e-12);
    EXPECT_NEAR(r.ca, 100.0 / 3, 1e-12);
    EXPECT_NEAR(*r.mean_codebleu, (0.71234 + 0.2) / 2, 1e-12);
    EXPECT_NEAR(r.unsafe_ratio, 300.0 / 11, 1e-12);

    auto j = to_json(r);
    EXPECT_EQ(j["schema"], kReportSchema);
    EXPECT_EQ(j["csr"], 66.7);
    EXPECT_EQ(j["ca"], 33.3);
    EXPECT_EQ(j["unsafe_ratio"], 27.3);
    EXPECT_EQ(j["mean_codebleu"], 0.456);
    EXPECT_EQ(j["per_unit"][0]["codebleu"], 0.712);
    EXPECT_TRUE(j["per_unit"][2]["tests_passed"].is_null());

    auto back = report_from_json(j);
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(back.per_unit[2].note, "not compiled");
    EXPECT_THROW(report_from_json(nlohmann::json{{"schema", "other"}}), FatalError);
}

TEST(Report, SummaryTable) {
    auto t = summary_table({summary_only("DCBench", 125, 51.2, 36.8), summary_only("TOTAL", 145, 57.24, 41.38)});
    auto lines = split_lines(t);
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_NE(lines[0].find("CSR"), std::string::npos);
    EXPECT_NE(lines[2].find("57.2"), std::string::npos);
    EXPECT_NE(lines[2].find("41.4"), std::string::npos);
    EXPECT_EQ(lines[1].size(), lines[2].size());
}
