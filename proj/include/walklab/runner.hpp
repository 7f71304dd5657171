#pragma once

// Config-driven orchestration behind the CLI: JSON config validation with
// strict unknown-field rejection, seed precedence (WALKLAB_SEED environment
// variable over the config's seed), command dispatch, and artifact emission.

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "walklab/lattice.hpp"
#include "walklab/spectral.hpp"

namespace walklab {

struct RunContext {
  std::string command;
  std::string config_path;  ///< may be empty for the bundled `rates` command
  std::string out_dir = ".";
  int threads = 1;
};

/// Dispatches a command, writing artifacts plus manifest.json into the
/// output directory.  Domain errors are rendered as machine-readable JSON on
/// stdout; the return value is the process exit code (0 ok, 2 validation,
/// 3 cap exceeded, 4 invariant violation, 1 anything else).
int run_command(const RunContext& ctx);

/// Core dispatch used by run_command and the tests: throws on failure,
/// returns a summary of what was computed and written.
nlohmann::json run_command_core(const std::string& command,
                                const nlohmann::json& config,
                                const std::string& out_dir, int threads);

/// Builds the lattice system described by a walk config (either a
/// polynomial construction or explicit translate rows).
LatticeSystem system_from_config(const nlohmann::json& walk);

/// Builds the full step distribution (selector and per-direction laws
/// default to the uniform selector with symmetric unit steps).
StepDistribution walk_from_config(const nlohmann::json& walk);

/// Builds the test function described by an `f` config.
TestFunction function_from_config(const nlohmann::json& f);

/// Master seed for a run: WALKLAB_SEED from the environment when set
/// (must parse as an unsigned 64-bit integer), else the config's `seed`,
/// else 0.
std::uint64_t effective_seed(const nlohmann::json& config);

}  // namespace walklab
