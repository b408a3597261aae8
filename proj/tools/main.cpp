#include "kaczmarz/cli.hpp"

#include <iostream>

int main(int argc, char **argv) {
  return kaczmarz::cli_main(argc, argv, std::cout, std::cerr);
}
