#include "cli.hpp"

int main(int argc, char** argv) { return tuneinf::cli::run_cli(argc, argv); }
