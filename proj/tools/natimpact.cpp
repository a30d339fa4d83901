#include "natimpact/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return natimpact::run_cli(argc, argv, std::cout, std::cerr);
}
