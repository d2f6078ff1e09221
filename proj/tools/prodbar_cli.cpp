#include <prodbar/cli.hpp>

int main(int argc, char** argv) { return prodbar::cli::run(argc, argv); }
