#include "cli_app.hpp"

int main(int argc, char** argv) { return fracvol::cli::run(argc, argv); }
