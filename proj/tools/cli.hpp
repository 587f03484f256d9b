#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace simclust::cli {

enum ExitCode { ok = 0, usage = 2, data = 3, numerical = 4 };

/// Runs one command line (without the program name). Artifacts go to the
/// paths named by --out, or to `out` when --out is absent; messages go to
/// `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace simclust::cli
