#include "steinrmt/cli/experiment.hpp"

int main(int argc, char** argv) { return steinrmt::cli::main_entry(argc, argv); }
