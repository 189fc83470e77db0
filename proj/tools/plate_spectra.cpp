#include "plate/cli.hpp"

int main(int argc, char** argv) { return plate::cli::run(argc, argv); }
