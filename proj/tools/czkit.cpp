#include "czkit/cli.hpp"

int main(int argc, char** argv) { return czkit::run(argc, argv); }
