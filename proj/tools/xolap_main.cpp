#include <iostream>

#include "xolap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return xolap::run_cli(args, std::cout, std::cerr);
}
