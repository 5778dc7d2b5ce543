// Command-line front end. cli_run is the whole program behind main(), kept
// in the library so tests can drive it in-process.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phishpanel {

// args are argv[1..]; returns the process exit code: 0 success, 1 data or
// validation error, 2 usage error.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phishpanel
