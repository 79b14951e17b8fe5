#pragma once

namespace conecalc::cli {

// Full command-line entry point (parse flags, load the JSON config, run the
// requested experiment, write report.json and CSV artifacts).
//
// Exit codes: 0 = all pass-criteria in the run passed; 2 = a pass-criterion
// failed; 1 = configuration or numerical error.
//
// Exposed as a function so tests can drive it in-process.
int run_cli(int argc, const char* const* argv);

}  // namespace conecalc::cli
