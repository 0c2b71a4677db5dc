#include <doctest.h>

TEST_SUITE("oracle") {}
