#include "stagnn/cli.hpp"

int main(int argc, char** argv) { return stagnn::run_cli(argc, argv); }
