#include "cli.h"

#include <iostream>

int main(int argc, char** argv) {
  return symplane::cli::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
