#include <iostream>

#include "mixbn/cli.hpp"

int main(int argc, char** argv) { return mixbn::cli::run(argc, argv, std::cout, std::cerr); }
