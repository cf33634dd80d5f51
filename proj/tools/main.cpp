#include <iostream>

#include "graphflow/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return graphflow::run_cli(args, std::cout, std::cerr);
}
