#include "trafficgame/cli.hpp"

int main(int argc, char** argv) { return trafficgame::cli_main(argc, argv); }
