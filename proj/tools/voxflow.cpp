#include <iostream>

#include "voxflow/cli.hpp"

int main(int argc, char** argv) { return voxflow::run_cli(argc, argv, std::cout, std::cerr); }
