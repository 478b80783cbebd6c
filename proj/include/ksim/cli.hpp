#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ksim::cli {

/// Exit codes: 0 success, 1 usage error, 2 runtime or data error.
enum ExitCode : int
{
  ok = 0,
  usage = 1,
  failure = 2
};

/// `args` excludes the program name.
int run(std::vector<std::string> const &args, std::ostream &out, std::ostream &err);
int run(int argc, char **argv);

/// Accepts "0.25" or "1/4".
double parse_fraction(std::string const &text);

} // namespace ksim::cli
