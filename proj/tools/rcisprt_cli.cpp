#include <iostream>

#include "rcisprt/cli.hpp"

int main(int argc, char** argv) { return rcisprt::run_cli(argc, argv, std::cout, std::cerr); }
