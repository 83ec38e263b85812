#pragma once

namespace scout {

// Entry point behind the scout binary. Subcommands:
//   run      one seeded exploration run, artifacts written to --out
//   sweep    several seeds in parallel, one directory per seed, aggregated
//   metrics  recompute metrics.csv from a persisted runlog, verifying replay
//   export   regenerate heatmap (and representation, given a checkpoint)
// Returns 0 on success, 1 when a run aborts or an artifact cannot be
// written, 2 for bad flags or configuration.
int run_cli(int argc, const char* const* argv);

}  // namespace scout
