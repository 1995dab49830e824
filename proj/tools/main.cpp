#include "psforge/cli.hpp"

int main(int argc, char** argv) { return psforge::run_cli(argc, argv); }
