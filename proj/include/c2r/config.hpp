#pragma once

#include "c2r/refiner.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace c2r {

enum class BackendKind { Mock, Remote };

/// Every knob of a run. Loaded from an INI file, then overridden by flags.
struct RunConfig {
    std::filesystem::path c_root;
    std::optional<std::filesystem::path> pool_root;
    std::filesystem::path output_dir = "c2r-run";

    BackendKind backend = BackendKind::Mock;
    std::filesystem::path mock_script;
    std::string endpoint;   // C2R_ENDPOINT
    std::string model;
    std::string token;      // C2R_TOKEN; never written to the snapshot
    std::string embedding;  // "hashing" or an embeddings endpoint URL

    std::size_t compile_iters = 3;
    std::size_t consistency_iters = 2;
    std::size_t candidates = 1;

    double similarity_floor = 0.35;
    std::size_t top_k = 1;
    std::size_t verbatim_threshold = 400;
    std::size_t context_budget = 12000;

    double alpha = 1.0;
    double beta = 1.0;

    std::string rustc = "rustc";
    std::string cargo = "cargo";
    std::chrono::seconds compile_timeout{120};
    std::size_t jobs = 1;
    bool keep_artifacts = false;
    std::optional<std::filesystem::path> templates_dir;

    // ablations
    bool plain_deps = false;

    std::optional<std::size_t> max_levels; // stop after this many levels (checkpointed)

    refine::Budgets budgets() const { return {compile_iters, consistency_iters}; }

    bool operator==(const RunConfig&) const = default;
};

/// Key/value pairs as flat "section.key" names.
using ConfigValues = std::map<std::string, std::string>;

/// Reads an INI file into flat "section.key" values. Throws FatalError.
ConfigValues read_config_file(const std::filesystem::path& path);

/// Applies values onto `config`; unknown keys and malformed numbers throw FatalError.
/// Relative paths are resolved against `base` when it is non-empty.
void apply_values(RunConfig& config, const ConfigValues& values, const std::filesystem::path& base = {});

/// Fills endpoint and token from C2R_ENDPOINT / C2R_TOKEN / C2R_MODEL when unset.
void apply_environment(RunConfig& config);

/// Throws FatalError naming the first violated constraint.
void validate(const RunConfig& config);

/// INI text of the config (token omitted). Round-trips through read_config_file + apply_values.
std::string snapshot(const RunConfig& config);

} // namespace c2r
