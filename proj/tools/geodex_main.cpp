#include <iostream>

#include "geodex/cli.hpp"

int main(int argc, char** argv) { return geodex::run_cli(argc, argv, std::cout, std::cerr); }
