#include <iostream>

#include "hetpatrol/cli.hpp"

int main(int argc, char** argv) { return hetpatrol::cli::run(argc, argv, std::cout, std::cerr); }
