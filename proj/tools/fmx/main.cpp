#include <iostream>

#include "frustummix/cli.hpp"

int main(int argc, char** argv) { return fmx::cli::run_cli(argc, argv, std::cout, std::cerr); }
