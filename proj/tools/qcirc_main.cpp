// placeholder while the library grows; replaced by the real CLI
#include "qcirc/builder.hpp"
#include "qcirc/spectrum.hpp"

int main() { return 0; }
