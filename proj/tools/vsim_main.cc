#include <iostream>

#include "vsim/cli.hh"

int main(int argc, char** argv) {
  return vsim::cli_main(argc, argv, std::cout, std::cerr);
}
