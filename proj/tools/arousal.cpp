#include "arousal/cli.hpp"

int main(int argc, char** argv) { return arousal::cli::dispatch(argc, argv); }
