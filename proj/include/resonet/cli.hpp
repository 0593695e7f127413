#pragma once

#include <string>

#include "resonet/config.hpp"

namespace resonet {

// Exit codes: distinct per error class so scripts can branch on them.
enum ExitCode {
    ExitOk = 0,
    ExitUsage = 2,    // bad flags, bad config values
    ExitIo = 3,       // missing/malformed files
    ExitNumeric = 4,  // runtime numeric failure (divergence etc.)
};

// Shared per-run context: resolved output directory plus the global flags.
struct RunContext {
    std::string out_dir;
    long long seed = 1;
    std::string precision = "float";  // "float" | "fixed"
    int threads = 1;
};

// Subcommand entry points. Each reads its section of `cfg`, writes outputs
// under ctx.out_dir, and persists the fully resolved config as
// `resolved.cfg` so the run can be replayed bit for bit.
int cmd_neuron_demo(KeyValues& cfg, const RunContext& ctx);
int cmd_stft(const std::string& action, KeyValues& cfg, const RunContext& ctx);
int cmd_flow(KeyValues& cfg, const RunContext& ctx);
int cmd_cochlea(const std::string& action, KeyValues& cfg, const RunContext& ctx);

// Full argv front end (CLI11); returns an ExitCode.
int run_cli(int argc, char** argv);

}  // namespace resonet
