#include "amphim/cli/run.hpp"

int main(int argc, char** argv) { return amphim::cli::main(argc, argv); }
