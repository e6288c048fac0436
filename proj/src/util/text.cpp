#include "c2r/util/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;

namespace c2r {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FatalError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FatalError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string_view trim(std::string_view s) {
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto nl = s.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < s.size()) lines.emplace_back(s.substr(start));
            break;
        }
        auto end = nl > start && s[nl - 1] == '\r' ? nl - 1 : nl;
        lines.emplace_back(s.substr(start, end - start));
        start = nl + 1;
    }
    return lines;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    }
    return true;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_tree(const fs::path& root, const std::vector<std::string>& skip_dirs) {
    std::vector<fs::path> files;
    for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
        if (it.depth() == 0 && it->is_directory() &&
            std::find(skip_dirs.begin(), skip_dirs.end(), it->path().filename().string()) != skip_dirs.end()) {
            it.disable_recursion_pending();
            continue;
        }
        if (it->is_regular_file()) files.push_back(it->path());
    }
    std::sort(files.begin(), files.end());
    std::uint64_t h = fnv1a("");
    for (const auto& f : files) {
        h = fnv1a(fs::relative(f, root).generic_string(), h);
        h = fnv1a(read_file(f), h);
    }
    return h;
}

std::string sanitize_id(std::string_view id) {
    std::string out;
    out.reserve(id.size());
    for (char c : id) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        out += ok ? c : '_';
    }
    // keep distinct ids distinct after the lossy mapping
    char suffix[20];
    std::snprintf(suffix, sizeof suffix, "-%08x", static_cast<unsigned>(fnv1a(id) & 0xffffffffu));
    return out + suffix;
}

double round1(double value) {
    // Nudge by a relative epsilon so values like 57.25 stored as 57.2499999 round up.
    double scaled = value * 10.0;
    double nudged = scaled + std::copysign(1e-9 * std::max(1.0, std::fabs(scaled)), scaled);
    return std::round(nudged) / 10.0;
}

std::string format1(double value) {
    char buf[64];
    double r = round1(value);
    if (r == 0.0) r = 0.0; // no "-0.0"
    std::snprintf(buf, sizeof buf, "%.1f", r);
    return buf;
}

TempDir::TempDir(std::string_view prefix) {
    std::random_device rd;
    std::mt19937_64 gen(rd());
    for (int attempt = 0; attempt < 100; ++attempt) {
        char name[64];
        std::snprintf(name, sizeof name, "%.*s-%016llx", static_cast<int>(prefix.size()), prefix.data(),
                      static_cast<unsigned long long>(gen()));
        auto candidate = fs::temp_directory_path() / name;
        if (fs::create_directory(candidate)) {
            path_ = candidate;
            return;
        }
    }
    throw FatalError("cannot create temporary directory");
}

TempDir::~TempDir() {
    if (keep_ || path_.empty()) return;
    std::error_code ec;
    fs::remove_all(path_, ec);
}

} // namespace c2r
