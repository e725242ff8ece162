#include <iostream>

#include "ponder/cli.hpp"

int main(int argc, char** argv) {
    return ponder::cli::run_cli(argc, argv, std::cout, std::cerr);
}
