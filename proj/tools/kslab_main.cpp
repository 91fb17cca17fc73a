#include "kslab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return kslab::run_cli(argc, argv, std::cout, std::cerr); }
