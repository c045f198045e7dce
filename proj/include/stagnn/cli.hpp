#pragma once

namespace stagnn {

// Parses the command line (a subcommand plus flags that mirror the config
// file keys), runs the requested command and maps failures onto the
// documented exit codes: 0 ok, 2 input error, 3 training divergence,
// 4 artifact mismatch, 5 empty selection.
int run_cli(int argc, const char* const* argv);

}  // namespace stagnn
