#pragma once

#include "lipfd/config.hpp"

#include <filesystem>
#include <functional>
#include <string>

namespace lipfd::cli {

/// Subcommand implementations. All of them throw on failure; run_guarded
/// maps exceptions onto the documented exit codes (0 success, 2 validation,
/// 3 runtime/numeric).
int cmd_synth(const RunConfig& cfg, int n_clips, const std::filesystem::path& out_dir);
int cmd_preprocess(const RunConfig& cfg, const std::filesystem::path& manifest,
                   const std::filesystem::path& out_dir);
int cmd_train(const RunConfig& cfg, const std::filesystem::path& cache_dir,
              const std::filesystem::path& out_dir, const std::string& resume = "");
int cmd_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint,
             const std::filesystem::path& cache_dir, const std::filesystem::path& out_dir);
int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& checkpoint,
              const std::filesystem::path& cache_dir, const std::filesystem::path& out_dir,
              const std::string& kinds_csv = "all", const std::string& severities_csv = "1,2,3,4,5");
int cmd_perturb(const RunConfig& cfg, const std::filesystem::path& in_dir,
                const std::filesystem::path& out_dir, const std::string& kind, int severity);
int cmd_viz(const RunConfig& cfg, const std::filesystem::path& checkpoint,
            const std::filesystem::path& cache_dir, const std::string& sample_name,
            const std::filesystem::path& out_dir);

int run_guarded(const std::function<int()>& fn);

}  // namespace lipfd::cli
