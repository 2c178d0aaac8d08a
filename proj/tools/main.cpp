#include "dpmgarch/cli.hpp"

int main(int argc, char** argv) { return dpmgarch::run_cli(argc, argv); }
