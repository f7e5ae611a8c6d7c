#pragma once

#include "nlsv/trace_io.hpp"

namespace nlsv {

/// Invalid or inconsistent run configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Resolved run description: grid + potential + task + task parameters.
struct RunConfig {
    json raw;  // fully resolved config echoed into every artifact
    int threads = 1;
    bool refine = false;
    std::string task;
    std::filesystem::path out_dir;
};

RunConfig load_config(const std::filesystem::path& config_path, const std::string& task,
                      const std::filesystem::path& out_dir, int threads, bool refine);

/// Execute one task, writing its artifacts under cfg.out_dir.
/// Throws ConfigError / std::invalid_argument on validation problems and
/// NumericalError on numerical failures.
void run_task(const RunConfig& cfg);

/// CLI entry: maps exceptions to exit codes (0 ok, 2 config, 3 numerical)
/// and writes error.json on failure.
int run_cli(const std::filesystem::path& config_path, const std::string& task,
            const std::filesystem::path& out_dir, int threads, bool refine);

}  // namespace nlsv
