#include "sqzom/cli.hpp"

int main(int argc, char** argv) { return sqzom::cli::main(argc, argv); }
