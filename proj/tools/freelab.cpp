#include <iostream>

#include "freelab/cli.hpp"

int main(int argc, char** argv) { return freelab::run_command_line(argc, argv, std::cout, std::cerr); }
