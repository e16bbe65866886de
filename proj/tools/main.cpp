#include "cli.hpp"

int main(int argc, char** argv) {
    return foi::cli::cli_main(argc, argv);
}
