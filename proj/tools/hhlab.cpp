#include <unistd.h>

#include <iostream>
#include <string>
#include <vector>

#include "hhlab/cli.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  const std::vector<std::string> args(argv + 1, argv + argc);
  return hhlab::run_cli(args, std::cout, std::cerr, isatty(STDOUT_FILENO) != 0);
}
