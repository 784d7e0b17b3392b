#include "apnet/scenario.hpp"

int main(int argc, char** argv) { return apnet::cli_main(argc, argv); }
