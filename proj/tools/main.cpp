#include "pqr_cli/cli.hpp"

int main(int argc, char** argv) { return pqr::cli::main_entry(argc, argv); }
