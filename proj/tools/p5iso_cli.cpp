#include "p5iso/cli/dispatch.hpp"

int main(int argc, char** argv) { return p5iso::cli::dispatch(argc, argv).code; }
