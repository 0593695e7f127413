#include "resonet/cli.hpp"

int main(int argc, char** argv) { return resonet::run_cli(argc, argv); }
