#include "rdr/cli.hpp"

int main(int argc, char** argv) { return rdr::cli_main(argc, argv); }
