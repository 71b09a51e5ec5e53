#include "repsim/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return repsim::run_cli(argc, argv, std::cout, std::cerr); }
