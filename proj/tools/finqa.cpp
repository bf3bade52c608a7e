#include <iostream>

#include "finqa/cli.hpp"

int main(int argc, char** argv) { return finqa::cli_dispatch(argc, argv, std::cout, std::cerr); }
