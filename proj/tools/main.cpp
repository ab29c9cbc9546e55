#include <iostream>

#include "dcell/cli.hpp"

int main(int argc, char** argv) { return dcell::cli::run(argc, argv, std::cout, std::cerr); }
