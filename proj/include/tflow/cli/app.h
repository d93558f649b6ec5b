//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_CLI_APP_H_
#define TFLOW_CLI_APP_H_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "tflow/chem/metrics.h"
#include "tflow/config.h"

namespace tflow {

enum ExitCode {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

// Entry point of the `tflow` executable. Subcommands: ingest, train,
// generate, eval, audit, make-synthetic. Returns the process exit code.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

// Two-column CSV (metric_name,value), one line per valid molecule row with
// its nearest-neighbor Tanimoto (percent), in row order. Values use 17
// significant digits. E_IO if the file cannot be written.
void emit_density_data(const MetricsReport &report,
                       const std::filesystem::path &path);

// Every key the configuration layer understands, with its default value.
Config default_run_config();

}  // namespace tflow

#endif  // TFLOW_CLI_APP_H_
