#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "magpol/model_core.hpp"

// Command implementations behind the magpol executable. Each command loads a
// JSON config, runs the corresponding library pipeline and writes its output
// files into out_dir. Errors are reported as a single "error: ..." line on
// stderr. Exit code 0 means every requested computation converged and every
// output was written; 2 flags config/input errors, 1 runtime failures
// (non-convergence, supercritical points). Kept as library functions so tests
// can drive them in-process.

namespace magpol::cli {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<ModelVariant> variant;
    bool emit_plots = false;
};

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const Overrides& overrides = {});
int cmd_fit(const std::string& config_path, const std::string& out_dir,
            const Overrides& overrides = {});
int cmd_bloch_siegert(const std::string& config_path, const std::string& out_dir,
                      const Overrides& overrides = {});
int cmd_report(const std::string& config_path, const std::string& out_dir,
               const Overrides& overrides = {});
int cmd_scaling(const std::string& config_path, const std::string& out_dir,
                const Overrides& overrides = {});

} // namespace magpol::cli
