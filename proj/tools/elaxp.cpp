#include <iostream>

#include "elaxp/commands.hpp"

int main(int argc, char** argv) { return elaxp::run_cli(argc, argv, std::cout, std::cerr); }
