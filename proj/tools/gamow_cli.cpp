#include "gamow/cli.hpp"

int main(int argc, char** argv) { return gamow::cli::run(argc, argv); }
