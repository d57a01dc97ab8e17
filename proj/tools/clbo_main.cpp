#include "clbo/cli.hpp"

int main(int argc, char** argv) { return clbo::cli_main(argc, argv); }
