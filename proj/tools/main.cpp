#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return bvm::cli::run(argc, argv, std::cout, std::cerr); }
