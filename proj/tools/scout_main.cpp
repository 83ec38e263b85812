#include "scout/cli.hpp"

int main(int argc, char** argv) { return scout::run_cli(argc, argv); }
