#include <iostream>

#include "langevin_mdp/cli.hpp"

int main(int argc, char** argv) { return lmdp::run_cli(argc, argv, std::cout, std::cerr); }
