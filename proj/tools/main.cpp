#include "cli.hpp"

int main(int argc, char** argv) { return wignerscope::cli::run(argc, argv); }
