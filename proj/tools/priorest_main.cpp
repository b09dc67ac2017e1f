#include "priorest/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return priorest::run_cli(argc, argv, std::cout, std::cerr); }
