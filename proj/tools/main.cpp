#include "bayesrvm/cli_main.hpp"

int main(int argc, char** argv) { return bayesrvm::run_cli(argc, argv); }
