#include "cli.hpp"

int main(int argc, char** argv) { return hardy::cli::cli_main(argc, argv); }
