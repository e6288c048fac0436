#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace c2r {

/// Unrecoverable problem with inputs or environment. The CLI maps it to exit 2.
class FatalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (negative counts, mismatched lengths...).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::string_view trim(std::string_view s);
/// Lines without their terminators ("\n" or "\r\n"); no trailing empty line.
std::vector<std::string> split_lines(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);
std::string to_lower(std::string_view s);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Hash of every regular file under root (relative path + bytes), skipping the
/// named top-level directories.
std::uint64_t hash_tree(const std::filesystem::path& root,
                        const std::vector<std::string>& skip_dirs = {});

/// Maps an identifier such as "src/a.c::f" to a file-name-safe token.
std::string sanitize_id(std::string_view id);

/// Round half away from zero to one decimal place.
double round1(double value);

/// Formats with exactly one decimal, after round1.
std::string format1(double value);

/// RAII temporary directory, removed on destruction unless released.
class TempDir {
public:
    explicit TempDir(std::string_view prefix = "c2r");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    void keep() { keep_ = true; }

private:
    std::filesystem::path path_;
    bool keep_ = false;
};

} // namespace c2r
