#include "rsf/cli/app.hpp"

int main(int argc, char** argv) { return rsf::cli::run(argc, argv); }
