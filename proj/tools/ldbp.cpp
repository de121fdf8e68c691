#include <iostream>

#include "ldbp/cli.hpp"

int main(int argc, char** argv) { return ldbp::run_cli(argc, argv, std::cout, std::cerr); }
