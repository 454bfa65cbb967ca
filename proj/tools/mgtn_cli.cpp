#include "mgtn/cli/cli.hpp"

int main(int argc, char **argv) { return mgtn::cli::run_cli(argc, argv); }
