#include "frohlich/io/cli.hpp"

int main(int argc, char** argv) { return frohlich::io::run_cli(argc, argv); }
