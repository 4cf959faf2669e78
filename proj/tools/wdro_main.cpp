#include <iostream>

#include "wdro/cli.hpp"

int main(int argc, char** argv) {
    return wdro::run_cli(argc, argv, std::cout, std::cerr);
}
