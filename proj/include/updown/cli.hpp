#pragma once

#include <iosfwd>

namespace updown {

// Subcommands: prepare, train, predict, eval, gradcheck, synth, grid.
// Returns 0 on success, 1 on data errors, 2 on usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace updown
