#include "cli.hpp"

int main(int argc, char** argv) { return shapeloss::cli::run(argc, argv); }
