#include "ridgepath/cli.hpp"

int main(int argc, char** argv) { return ridgepath::cli::run_cli(argc, argv); }
