#include "kgroot/cli.hpp"

int main(int argc, char** argv) { return kgroot::run_cli(argc, argv); }
