#include "mgpi/cli.hpp"

int main(int argc, char** argv) { return mgpi::cli::run(argc, argv); }
