#include "glnar/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return glnar::cli::main(argc, argv, std::cout, std::cerr); }
