#include <iostream>
#include <string>
#include <vector>

#include "despeckle/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return despeckle::cli::run(args, std::cout, std::cerr);
}
