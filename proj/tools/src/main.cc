#include <iostream>

#include "champagne_cli/cli.h"

int main(int argc, char** argv) { return champagne::cli::run(argc, argv, std::cout, std::cerr); }
