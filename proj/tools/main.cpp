#include "recokit/cli.hpp"

int main(int argc, char** argv) {
    return recokit::run_cli(argc, argv);
}
