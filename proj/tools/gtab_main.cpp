#include <iostream>

#include "gtab/cli.hpp"

int main(int argc, char** argv) { return gtab::run_cli(argc, argv, std::cout, std::cerr); }
