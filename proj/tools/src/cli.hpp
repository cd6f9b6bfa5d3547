#pragma once

#include <iosfwd>

namespace teamsim::tools {

// Entry point of the teamsim command-line tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace teamsim::tools
