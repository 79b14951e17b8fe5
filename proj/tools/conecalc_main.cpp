#include "conecalc/cli_driver.hpp"

int main(int argc, char** argv) { return conecalc::cli::run_cli(argc, argv); }
