#include <iostream>

#include "dhash/cli.hpp"

int main(int argc, char** argv) { return dhash::cli::run(argc, argv, std::cout, std::cerr); }
