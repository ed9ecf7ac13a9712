#include <iostream>
#include <string>
#include <vector>

#include "vortexqkd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return vortexqkd::run_cli(args, std::cout, std::cerr);
}
