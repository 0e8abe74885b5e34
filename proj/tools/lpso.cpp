#include <iostream>

#include "lpso/cli.hpp"

int main(int argc, char** argv) { return lpso::run_cli(argc, argv, std::cout, std::cerr); }
