#include <iostream>

#include "chanest/cli.hpp"

int main(int argc, char** argv) { return chanest::cli::main_entry(argc, argv, std::cout, std::cerr); }
