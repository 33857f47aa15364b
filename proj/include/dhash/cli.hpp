#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dhash::cli {

// Entry point for the `dhash` command line tool. Subcommands: train, encode,
// gt, eval. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dhash::cli
