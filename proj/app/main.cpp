#include "wavescat/cli.hpp"

int main(int argc, char** argv)
{
    return wavescat::run_cli(argc, argv);
}
