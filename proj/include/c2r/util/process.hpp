#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace c2r {

struct ProcessResult {
    int exit_code = -1;     // -1 when killed or never started
    bool timed_out = false;
    bool spawn_failed = false;
    std::string out;
    std::string err;

    bool ok() const { return !timed_out && !spawn_failed && exit_code == 0; }
};

struct ProcessOptions {
    std::filesystem::path cwd;
    std::map<std::string, std::string> env; // added to the inherited environment
    std::chrono::milliseconds timeout{std::chrono::seconds(120)};
};

/// Runs argv[0] (looked up on PATH) and collects both output streams.
/// On timeout the whole process group is killed.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options = {});

/// True when `program --version` runs successfully.
bool program_available(const std::string& program);

} // namespace c2r
