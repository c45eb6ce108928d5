#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reconkit::cli {

/// Runs one subcommand. args excludes the program name. Results go to out,
/// diagnostics and error JSON to err. Returns 0 on success, 1 on a failed
/// command and 2 on a usage error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace reconkit::cli
