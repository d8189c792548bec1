#include "semilin/cli.hpp"

int main(int argc, char** argv) { return semilin::cli::run(argc, argv); }
