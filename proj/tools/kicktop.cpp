#include "kicktop/cli.hpp"

int main(int argc, char** argv) { return kicktop::cli_main(argc, argv); }
