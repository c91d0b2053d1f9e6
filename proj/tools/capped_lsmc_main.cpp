#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return capped_lsmc::cli::run(argc, argv, std::cout, std::cerr); }
