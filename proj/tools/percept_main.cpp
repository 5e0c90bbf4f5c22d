#include "percept/cli.hpp"

int main(int argc, char** argv) { return percept::cli_main(argc, argv); }
