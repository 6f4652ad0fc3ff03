#include <iostream>
#include <string>
#include <vector>

#include "bdm/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv, argv + argc);
    return bdm::cli_main(args, std::cout, std::cerr);
}
