#include <iostream>

#include "spatel/cli.hpp"

int main(int argc, char** argv) {
  return spatel::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
