#include <iostream>

#include "idxsel/commands.hpp"

int main(int argc, char** argv) { return idxsel::run_cli(argc, argv, std::cout, std::cerr); }
