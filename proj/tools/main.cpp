#include <iostream>
#include <string>
#include <vector>

#include "infers/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return infers::cli::run(args, std::cout, std::cerr);
}
