#include "optiq/bench.hpp"

int main(int argc, char** argv) { return optiq::cli_main(argc, argv); }
