#include "trapsift_cli.hpp"

int main(int argc, char** argv) { return trapsift::cli::run(argc, argv); }
