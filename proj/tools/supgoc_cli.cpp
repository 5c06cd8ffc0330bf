#include <iostream>

#include "supgoc/cli.hpp"

int main(int argc, char** argv) { return supgoc::run_cli(argc, argv, std::cout, std::cerr); }
