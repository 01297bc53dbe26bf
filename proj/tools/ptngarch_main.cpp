#include "ptngarch/cli.hpp"

int main(int argc, char** argv) { return ptngarch::cli::run(argc, argv); }
