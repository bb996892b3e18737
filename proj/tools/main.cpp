#include "concept_dist/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return concept_dist::cli::run(argc, argv, std::cout, std::cerr); }
