#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gpsearch {

/// Command-line front end. args excludes the program name. Returns the
/// process exit code: 0 success, 1 usage or validation error, 2 I/O
/// error, 3 numerical failure (factorization still failing at the jitter
/// ceiling). Failures print a single diagnostic line to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace gpsearch
