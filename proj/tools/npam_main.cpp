#include "npam/cli.hpp"

int main(int argc, char** argv) { return npam::run_cli(argc, argv); }
