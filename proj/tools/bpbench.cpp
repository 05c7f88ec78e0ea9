#include "hexfem/cli.hpp"

int main(int argc, char** argv) { return hexfem::cli_main(argc, argv); }
