#include "cloudnet/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return cloudnet::cli::run(argc, argv, std::cout, std::cerr); }
