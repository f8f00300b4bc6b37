#include <iostream>

#include "ipid/cli.hpp"

int main(int argc, char** argv) {
  return ipid::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
