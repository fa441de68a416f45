#include <iostream>
#include <string>
#include <vector>

#include "conelab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return conelab::cli::run(args, std::cout, std::cerr);
}
