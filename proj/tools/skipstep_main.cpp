#include <iostream>
#include <string>
#include <vector>

#include "skipstep/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return skipstep::dispatch(args, std::cout, std::cerr);
}
