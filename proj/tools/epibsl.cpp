#include <iostream>
#include <string>
#include <vector>

#include "epibsl/cli.hpp"

int main(int argc, char** argv) {
    return epibsl::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
