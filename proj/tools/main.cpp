#include <iostream>
#include <string>
#include <vector>

#include "in2test/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return in2test::run_cli(args, std::cout, std::cerr);
}
