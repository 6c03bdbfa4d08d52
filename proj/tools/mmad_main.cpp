#include "mmad/cli.hpp"

int main(int argc, char** argv) { return mmad::cli::run(argc, argv); }
