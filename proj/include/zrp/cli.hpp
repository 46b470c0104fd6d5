#pragma once

#include <string>
#include <vector>

namespace zrp {

// Command-line front end.  `args` excludes the program name, e.g.
// {"simulate", "--config", "run.json"}.  Returns the process exit status:
// 0 success, 1 validation/usage error, 2 statistical-test failure, 3 I/O
// error.  Always prints a one-line JSON summary to stdout.
int run_cli(const std::vector<std::string>& args);

int run_cli(int argc, const char* const* argv);

}  // namespace zrp
