#include <iostream>

#include "emob/commands.hpp"

int main(int argc, char** argv) { return emob::run_cli(argc, argv, std::cout, std::cerr); }
