#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace valley::cli {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "VALLEY_OUTPUT_DIR";

/// Runs one command. `args` excludes the program name. Returns 0 on success,
/// 2 on usage errors and 1 on computation errors; computation errors print a
/// single JSON line {"error": kind, "message": text} to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace valley::cli
