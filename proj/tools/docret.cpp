#include "docret/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return docret::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
