#include <iostream>
#include <string>
#include <vector>

#include "nswlab/cli.hpp"

int main(int argc, char** argv) {
  nswlab::cli::apply_thread_env();
  std::vector<std::string> args(argv + 1, argv + argc);
  return nswlab::cli::run(args, std::cout, std::cerr);
}
