#include <iostream>

#include "oneseed/cli.hpp"

int main(int argc, char** argv) { return oneseed::cli::run(argc, argv, std::cout, std::cerr); }
