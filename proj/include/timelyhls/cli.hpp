#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "timelyhls/dse.hpp"
#include "timelyhls/llm.hpp"
#include "timelyhls/loop.hpp"
#include "timelyhls/toolchain.hpp"

namespace timelyhls {

enum class ToolchainKind { simulated, external };

std::string to_string(ToolchainKind kind);
ToolchainKind toolchain_kind_from_string(std::string_view s);

struct AppConfig {
    std::filesystem::path kb_dir;
    std::filesystem::path bench_manifest;
    std::filesystem::path results_root;
    BackendConfig backend;  // script_path may contain {benchmark}
    ToolchainKind toolchain = ToolchainKind::simulated;
    ExternalAdapterConfig external = ExternalAdapterConfig::vitis_defaults();
    RefinementConfig refinement;
    std::size_t jobs = 1;
    AnnealSchedule dse;
    std::size_t dse_max_points = 0;  // 0: whole space
};

// Relative paths resolve against the config file's directory. A `jobs` of 0
// means one per logical CPU. Throws ConfigError for a malformed document or
// a missing kb_dir / manifest.
AppConfig load_app_config(const std::filesystem::path& path);

// Script path for one benchmark ({benchmark} substituted).
std::filesystem::path script_for(const BackendConfig& cfg, std::string_view benchmark_id);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;  // not converged, validation errors
inline constexpr int usage = 2;    // bad flags, unknown ids, broken config
}  // namespace exit_code

// Entry point behind the `timelyhls` executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace timelyhls
