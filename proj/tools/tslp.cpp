#include <iostream>
#include <string>
#include <vector>

#include "tslp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return tslp::cli::run(args, std::cout, std::cerr);
}
