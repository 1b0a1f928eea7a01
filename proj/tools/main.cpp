#include <iostream>

#include "optosync/io.hpp"

int main(int argc, char** argv) {
  return optosync::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
