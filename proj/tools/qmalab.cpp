#include "qmalab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return qmalab::cli::run_cli(argc, argv, std::cout, std::cerr); }
