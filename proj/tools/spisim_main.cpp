#include "spisim/cli.hpp"

int main(int argc, char** argv) { return spisim::cli::run(argc, argv); }
