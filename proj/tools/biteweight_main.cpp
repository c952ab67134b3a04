#include "biteweight/cli.hpp"

int main(int argc, char** argv) { return biteweight::cli::run(argc, argv); }
