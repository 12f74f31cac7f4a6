#include <iostream>
#include <string>
#include <vector>

#include "pwi/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return pwi::cli::run(std::move(args), std::cout, std::cerr);
}
