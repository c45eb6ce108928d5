#include "reconkit/cli.hpp"

int main(int argc, char** argv) { return reconkit::cli::dispatch(argc, argv); }
