#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hawk::cli {

// Runs one `hawk` invocation. Returns 0 on success, 2 on usage or validation
// errors and 1 otherwise. Diagnostics go to `err`, command output to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hawk::cli
