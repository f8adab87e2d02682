#include "rlfep/app.hpp"

int main(int argc, char** argv) { return rlfep::cli_main(argc, argv); }
