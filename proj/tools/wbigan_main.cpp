#include <iostream>
#include <string>
#include <vector>

#include "wbigan/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return wbigan::run_cli(args, std::cout, std::cerr);
}
