#include <iostream>

#include "kbad/cli.hpp"

int main(int argc, char** argv) { return kbad::run_cli(argc, argv, std::cout, std::cerr); }
