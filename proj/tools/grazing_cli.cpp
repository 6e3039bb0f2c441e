#include "grazing/cli.hpp"

int main(int argc, char** argv) { return grazing::cli::run(argc, argv); }
