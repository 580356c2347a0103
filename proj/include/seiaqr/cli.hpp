#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace seiaqr {

/// Run one CLI invocation. `args` are the command-line arguments after the
/// program name, e.g. {"rc", "--params", "data/india.json"}.
///
/// Exit codes: 0 success (payload on `out` or in --out file); 2 usage error
/// (help/diagnostic on `err`); 1 domain error, reported as a JSON object
/// {"error": <code>, "message": <text>} on `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

/// main()-style wrapper over std::cout / std::cerr.
int run_cli(int argc, const char* const* argv);

}  // namespace seiaqr
