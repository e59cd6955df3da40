#include "preflab/app/cli.hpp"

int main(int argc, char** argv) { return preflab::app::run_cli(argc, argv); }
