#include <iostream>

#include "nilderiv/cli.hpp"

int main(int argc, char** argv) {
    return nilderiv::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
