#include <iostream>
#include <string>
#include <vector>

#include "qlil/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return qlil::cli::run(args, std::cout, std::cerr);
}
