#include <iostream>
#include <string>
#include <vector>

#include "robust_treat/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return robust_treat::cli::run(args, std::cout, std::cerr);
}
