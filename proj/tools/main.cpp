#include "cli_app.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return hodmd::cli::run_cli(argc, argv, std::cout, std::cerr);
}
