#include <iostream>
#include <string>
#include <vector>

#include "lcsampler/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return lcs::run_cli(args, std::cout, std::cerr);
}
