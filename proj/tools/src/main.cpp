#include "cohortsim_cli/cli.hpp"

int main(int argc, char** argv) { return cohortsim::cli::main(argc, argv); }
