#include <iostream>
#include <string>
#include <vector>

#include "bwgame/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bwgame::cli::run_cli(args, std::cout, std::cerr);
}
