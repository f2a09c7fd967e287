#include "commands.hpp"

int main(int argc, char** argv) { return aldi::cli::run(argc, argv); }
