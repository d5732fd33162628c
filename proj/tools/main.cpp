#include "cli.hpp"

int main(int argc, char** argv) { return ooe::cli::main(argc, argv); }
