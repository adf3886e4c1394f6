#include "commands.hpp"

int main(int argc, char** argv) { return zonewatch::cli::run(argc, argv); }
