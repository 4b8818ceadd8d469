#include "semoran/harness/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return semoran::harness::run_cli(argc, argv, std::cout, std::cerr, std::clog); }
