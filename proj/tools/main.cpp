#include "autrl/harness.hpp"

int main(int argc, char** argv) { return autrl::cli_main(argc, argv); }
