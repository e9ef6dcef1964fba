#include "arht/cli.hpp"

int main(int argc, char** argv) { return arht::cli_main(argc, argv); }
