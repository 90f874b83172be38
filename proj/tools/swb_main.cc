#include <iostream>
#include <string>
#include <vector>

#include "swb/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return swb::run_cli(args, std::cout, std::cerr);
}
