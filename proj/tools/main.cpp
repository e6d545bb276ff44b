#include "cli.hpp"

int main(int argc, char** argv) { return ovo::cli::run(argc, argv); }
