#include <doctest.h>

TEST_SUITE("gradest") {}
