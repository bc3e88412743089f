#pragma once

// Command-line front end shared by the executable, the tests and the Python
// module.

#include <iosfwd>
#include <string>
#include <vector>

namespace vmplace {

/// Runs one `vmplace` invocation; `args` excludes the program name.
/// Returns the process exit code (0 ok, 1 config, 2 trace, 3 internal).
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace vmplace
