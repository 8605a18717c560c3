#include <iostream>

#include "merw/cli.hpp"

int main(int argc, char** argv) { return merw::run_cli(argc, argv, std::cout, std::cerr); }
