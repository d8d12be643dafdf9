#include "cli.hpp"

int main(int argc, char** argv) { return adeuq::cli::run(argc, argv); }
