#include "nessqfi/cli.hpp"

int main(int argc, char** argv) { return nessqfi::cli::run_cli(argc, argv); }
