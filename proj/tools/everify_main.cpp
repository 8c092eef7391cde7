#include <iostream>

#include "everify/cli.hpp"

int main(int argc, char** argv) { return everify::run_cli(argc, argv, std::cout, std::cerr); }
