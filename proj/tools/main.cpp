#include "ksim/cli.hpp"

int main(int argc, char **argv) { return ksim::cli::run(argc, argv); }
