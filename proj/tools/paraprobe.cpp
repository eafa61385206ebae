#include <iostream>

#include "paraprobe/cli/cli.hpp"

int main(int argc, char** argv) { return paraprobe::cli::run(argc, argv, std::cout, std::cerr); }
