#include "sl2c_cli.hpp"

int main(int argc, char** argv) { return sl2c::cli::run(argc, argv); }
