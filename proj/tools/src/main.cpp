#include <iostream>

#include "obscura_cli/commands.hpp"

int main(int argc, char** argv) { return obscura::cli::run_cli(argc, argv, std::cout, std::cerr); }
