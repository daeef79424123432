#include "nsavg/cli.hpp"

int main(int argc, char** argv) { return nsavg::cli::main_entry(argc, argv); }
