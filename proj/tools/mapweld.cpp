#include "mapweld/cli.hpp"

int main(int argc, char** argv) { return mapweld::cli::run(argc, argv); }
