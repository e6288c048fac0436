#include "c2r/tokens.hpp"
#include "c2r/util/process.hpp"
#include "c2r/util/text.hpp"

#include <gtest/gtest.h>

namespace fs = std::filesystem;
using namespace c2r;

TEST(Text, TrimAndSplit) {
    EXPECT_EQ(trim("  a b \n"), "a b");
    EXPECT_EQ(trim(""), "");
    auto lines = split_lines("a\nb\r\n\nc");
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[1], "b");
    EXPECT_EQ(lines[2], "");
    EXPECT_TRUE(starts_with_ci("Mismatch: x", "MISMATCH"));
    EXPECT_FALSE(starts_with_ci("Mis", "MISMATCH"));
}

TEST(Text, RoundHalfAwayFromZero) {
    EXPECT_DOUBLE_EQ(round1(57.24), 57.2);
    EXPECT_DOUBLE_EQ(round1(41.38), 41.4);
    EXPECT_DOUBLE_EQ(round1(0.25), 0.3);
    EXPECT_DOUBLE_EQ(round1(-0.25), -0.3);
    EXPECT_DOUBLE_EQ(round1(2.449999), 2.4);
    EXPECT_EQ(format1(51.2), "51.2");
    EXPECT_EQ(format1(100.0), "100.0");
    EXPECT_EQ(format1(0.04), "0.0");
}

TEST(Text, SanitizeKeepsIdsDistinct) {
    auto a = sanitize_id("a.c::f");
    auto b = sanitize_id("a_c::f");
    EXPECT_NE(a, b);
    EXPECT_EQ(a.find('/'), std::string::npos);
    EXPECT_EQ(a.find(':'), std::string::npos);
    EXPECT_EQ(sanitize_id("x/y.c::g"), sanitize_id("x/y.c::g"));
}

TEST(Text, FileRoundTripAndTreeHash) {
    TempDir dir("c2r-test");
    write_file(dir.path() / "a" / "b.txt", "hello");
    EXPECT_EQ(read_file(dir.path() / "a" / "b.txt"), "hello");
    auto h1 = hash_tree(dir.path());
    write_file(dir.path() / "a" / "b.txt", "hellp");
    EXPECT_NE(h1, hash_tree(dir.path()));
    write_file(dir.path() / "a" / "b.txt", "hello");
    EXPECT_EQ(h1, hash_tree(dir.path()));
    write_file(dir.path() / "target" / "junk", "x");
    EXPECT_EQ(h1, hash_tree(dir.path(), {"target"}));
    EXPECT_NE(h1, hash_tree(dir.path()));
    EXPECT_THROW(read_file(dir.path() / "missing"), FatalError);
}

TEST(Text, TempDirRemovedUnlessKept) {
    fs::path removed, kept;
    {
        TempDir a("c2r-test");
        removed = a.path();
        TempDir b("c2r-test");
        b.keep();
        kept = b.path();
    }
    EXPECT_FALSE(fs::exists(removed));
    EXPECT_TRUE(fs::exists(kept));
    fs::remove_all(kept);
}

TEST(Process, CapturesOutputAndExitCode) {
    auto r = run_process({"sh", "-c", "echo out; echo err >&2; exit 3"});
    EXPECT_EQ(r.out, "out\n");
    EXPECT_EQ(r.err, "err\n");
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_FALSE(r.ok());
}

TEST(Process, EnvironmentAndCwd) {
    TempDir dir("c2r-test");
    ProcessOptions o;
    o.cwd = dir.path();
    o.env = {{"C2R_PROBE", "42"}};
    auto r = run_process({"sh", "-c", "echo $C2R_PROBE; pwd"}, o);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.out, "42\n" + fs::canonical(dir.path()).string() + "\n");
}

TEST(Process, TimeoutKillsTheProcess) {
    ProcessOptions o;
    o.timeout = std::chrono::milliseconds(200);
    auto start = std::chrono::steady_clock::now();
    auto r = run_process({"sh", "-c", "sleep 5"}, o);
    EXPECT_TRUE(r.timed_out);
    EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(3));
}

TEST(Process, MissingProgram) {
    auto r = run_process({"c2r-no-such-program-xyz"});
    EXPECT_TRUE(r.spawn_failed);
    EXPECT_FALSE(program_available("c2r-no-such-program-xyz"));
    EXPECT_TRUE(program_available("sh") || program_available("rustc"));
}

TEST(Tokens, EstimateCountsWordAndSymbolRuns) {
    EXPECT_EQ(estimate_tokens("a+=b1;"), 4u);
    EXPECT_EQ(estimate_tokens(""), 0u);
    EXPECT_EQ(estimate_tokens("   \n\t"), 0u);
    EXPECT_EQ(estimate_tokens("fn main() {}"), 4u); // fn, main, (), {}
    EXPECT_EQ(estimate_tokens("snake_case_name"), 1u);
}

TEST(Tokens, EstimateIsAdditiveOverWhitespace) {
    const char* parts[] = {"int x = 3;", "return x*2;", "/* c */", "a->b"};
    std::size_t sum = 0;
    std::string joined;
    for (const char* p : parts) {
        sum += estimate_tokens(p);
        joined += std::string(p) + "\n";
    }
    EXPECT_EQ(estimate_tokens(joined), sum);
}
