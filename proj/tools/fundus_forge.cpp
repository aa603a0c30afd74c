#include <iostream>
#include <string>
#include <vector>

#include "fundus/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return fundus::cli::run(args, std::cout, std::cerr);
}
