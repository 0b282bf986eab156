#include <iostream>

#include "qreduce/cli.hpp"

int main(int argc, char** argv) { return qreduce::run_cli(argc, argv, std::cout, std::cerr); }
