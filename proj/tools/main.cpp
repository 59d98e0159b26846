#include <iostream>

#include "ratings/cli.hpp"

int main(int argc, char** argv) { return ratings::cli::run(argc, argv, std::cout, std::cerr); }
