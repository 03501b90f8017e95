#pragma once

#include <filesystem>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace a2m::cli {

// Option values of a parsed subcommand, keyed by long name. Options that
// were not given contribute their default; paths in `path_options` are made
// absolute so the snapshot replays from any directory.
nlohmann::json resolved_options(const CLI::App& sub, const std::set<std::string>& path_options);

std::string config_hash(const nlohmann::json& snapshot);

struct RunContext {
    std::filesystem::path dir;
    nlohmann::json snapshot;

    std::filesystem::path file(const std::string& name) const { return dir / name; }
};

// Creates the run directory (`out_dir` when given, else
// $A2M_OUTPUT_ROOT or ./runs joined with <timestamp>-<hash>) and writes
// config.json into it.
RunContext open_run(const std::string& subcommand, const nlohmann::json& options, const std::string& out_dir);

}  // namespace a2m::cli
