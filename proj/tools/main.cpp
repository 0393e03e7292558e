#include <iostream>

#include "timelyhls/cli.hpp"

int main(int argc, char** argv) { return timelyhls::run_cli(argc, argv, std::cout, std::cerr); }
