#pragma once

namespace balo {

inline constexpr int kExitPass = 0;
inline constexpr int kExitMetricFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `balo_fv` tool.  Returns 0 when every report metric
/// passes, 1 on a metric failure and 2 on usage or configuration errors.
int cli_main(int argc, char** argv);

/// --threads when positive, else BALO_FV_THREADS, else the hardware count.
int resolve_threads(int requested);

}  // namespace balo
