#include <iostream>
#include <string>
#include <vector>

#include "nlcap/cli.hpp"

int main(int argc, char** argv) {
    return nlcap::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
