#include <iostream>

#include "selfheal_cli/cli.hpp"

int main(int argc, char** argv) { return selfheal::cli::run_cli(argc, argv, std::cout, std::cerr); }
