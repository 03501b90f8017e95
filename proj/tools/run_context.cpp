#include "run_context.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include "a2m/error.hpp"

namespace a2m::cli {

namespace fs = std::filesystem;
using nlohmann::json;

json resolved_options(const CLI::App& sub, const std::set<std::string>& path_options) {
    json out = json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string& name = opt->get_lnames().front();
        if (name == "help" || name == "out-dir") continue;
        std::string value = opt->count() > 0 ? opt->results().front() : opt->get_default_str();
        if (value.empty() && opt->count() == 0) continue;
        if (path_options.count(name) && !value.empty()) value = fs::absolute(value).lexically_normal().string();
        out[name] = value;
    }
    return out;
}

std::string config_hash(const json& snapshot) {
    const std::string text = snapshot.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf).substr(0, 12);
}

RunContext open_run(const std::string& subcommand, const json& options, const std::string& out_dir) {
    RunContext run;
    run.snapshot = {{"format", "a2m-run"}, {"version", 1}, {"subcommand", subcommand}, {"options", options}};
    const std::string hash = config_hash(run.snapshot);
    run.snapshot["config_hash"] = hash;

    if (!out_dir.empty()) {
        run.dir = out_dir;
    } else {
        const char* env = std::getenv("A2M_OUTPUT_ROOT");
        const fs::path root = env && *env ? fs::path(env) : fs::path("runs");
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        localtime_r(&now, &tm);
        char stamp[32];
        std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm);
        const std::string base = std::string(stamp) + "-" + hash;
        run.dir = root / base;
        for (int k = 1; fs::exists(run.dir); ++k) run.dir = root / (base + "-" + std::to_string(k));
    }
    std::error_code ec;
    fs::create_directories(run.dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + run.dir.string() + ": " + ec.message());
    std::ofstream out(run.file("config.json"));
    if (!out) throw Error(ErrorKind::Io, "cannot write " + run.file("config.json").string());
    out << run.snapshot.dump(2) << '\n';
    return run;
}

}  // namespace a2m::cli
