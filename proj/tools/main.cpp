#include <iostream>
#include <string>
#include <vector>

#include "boomforce/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return boomforce::run_cli(args, std::cout, std::cerr);
}
