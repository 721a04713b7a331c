#include "lkstopo/cli.hpp"

int main(int argc, char** argv) { return lkstopo::cli_main(argc, argv); }
