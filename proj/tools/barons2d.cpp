#include <iostream>

#include <barons2d/cli.hpp>

int main(int argc, char** argv) { return barons2d::cli_run(argc, argv, std::cout, std::cerr); }
