#include "ltc/cli.hpp"

int main(int argc, char** argv) { return ltc::run_cli(argc, argv); }
