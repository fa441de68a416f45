#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace conelab::cli {

  // Exit codes.
  inline constexpr int ok           = 0;  // witness found / property holds on the window
  inline constexpr int failure      = 1;  // usage, parse or internal error; failed verification
  inline constexpr int obstruction  = 2;  // violation or free pair found and verified
  inline constexpr int inconclusive = 3;

  // Runs one command line (args[0] is the program name).
  int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);

}  // namespace conelab::cli
