#pragma once

namespace msi {

// Parses arguments, dispatches the subcommand, maps errors to exit codes.
int run_cli(int argc, char** argv);

}  // namespace msi
