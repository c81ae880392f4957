#include "sedge/cli.hpp"

int main(int argc, char** argv) { return sedge::cli_main(argc, argv); }
