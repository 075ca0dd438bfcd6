#include "qham/cli.hpp"

int main(int argc, char** argv) { return qham::cli::main_entry(argc, argv); }
