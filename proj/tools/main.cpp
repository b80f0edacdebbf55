#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return hostility::run_cli(argc, argv, std::cout, std::cerr);
}
