#include <iostream>

#include "faultdx/cli.hpp"

int main(int argc, char** argv) {
  return faultdx::harness::cli_main(argc, argv, std::cout, std::cerr);
}
