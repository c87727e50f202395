#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return loras::cli::run(argc, argv, std::cout, std::cerr); }
