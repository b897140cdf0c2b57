#include "varsample/cli.hpp"

int main(int argc, char** argv) { return vs::run_cli(argc, argv); }
