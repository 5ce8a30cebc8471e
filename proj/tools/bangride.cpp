#include <iostream>

#include "bangride/cli.hpp"

int main(int argc, char** argv) { return bangride::cli::run(argc, argv, std::cout, std::cerr); }
