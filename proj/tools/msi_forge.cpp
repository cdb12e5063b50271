#include "msi/cli.hpp"

int main(int argc, char** argv) { return msi::run_cli(argc, argv); }
