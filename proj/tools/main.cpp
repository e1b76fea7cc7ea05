#include "psdaffine/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return psdaffine::run_cli(argc, argv, std::cout, std::cerr); }
