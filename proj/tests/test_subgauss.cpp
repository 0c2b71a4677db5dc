#include <doctest.h>

TEST_SUITE("subgauss") {}
