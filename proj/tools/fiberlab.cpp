#include <iostream>

#include "fiberlab/cli.hpp"

int main(int argc, char** argv) { return fiberlab::cli::run(argc, argv, std::cout, std::cerr); }
