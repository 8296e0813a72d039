#include <iostream>

#include "updown/cli.hpp"

int main(int argc, char** argv) {
  return updown::run_cli(argc, argv, std::cout, std::cerr);
}
