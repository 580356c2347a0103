#include "seiaqr/cli.hpp"

int main(int argc, char** argv) { return seiaqr::run_cli(argc, argv); }
