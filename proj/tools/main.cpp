#include "vrc/cli.hpp"

int main(int argc, char** argv) { return vrc::run_cli(argc, argv); }
