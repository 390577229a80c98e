#include "mgap/cli.hpp"

int main(int argc, char** argv) { return mgap::run_cli(argc, argv); }
