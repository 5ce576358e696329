#include <iostream>

#include "delaydmd/commands.hpp"

int main(int argc, char** argv) {
    return delaydmd::run_cli(argc, argv, std::cout, std::cerr);
}
