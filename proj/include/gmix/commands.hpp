#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "gmix/config.hpp"

namespace gmix {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitNumerical = 2,
  kExitMismatch = 3,
};

// Progress lines go to `status`; each command returns its machine-readable
// summary, which the tool prints on standard output.

// Writes <output.dir>/data.csv (with a label column), its data.json sidecar
// and config.txt.
nlohmann::json cmd_simulate(const RunConfig& config, std::ostream& status);

// Runs sampler.replicates chains on the configured data, writing
// chain_<r>.csv (plus sidecars), data.csv, data.json, config.txt and
// manifest.json.
// Chain r draws from stream 1000 + r of the configured seed.
nlohmann::json cmd_fit(const RunConfig& config, std::ostream& status);

// Reads a fit directory and writes summary.json, counts.csv and
// components.csv next to the traces.
nlohmann::json cmd_summarize(const std::string& dir, std::ostream& status);

// table ∈ {phidet, overlap, counts, clustering}. `config` supplies seed,
// output directory and replicate.* overrides; results are also written to
// <output.dir>/replicate_<table>.{txt,json} when `write_files` is set.
nlohmann::json cmd_replicate(const std::string& table, const RunConfig& config, bool write_files,
                             std::ostream& status);

}  // namespace gmix
