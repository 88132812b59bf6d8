#include "balo/cli.hpp"

int main(int argc, char** argv) { return balo::cli_main(argc, argv); }
