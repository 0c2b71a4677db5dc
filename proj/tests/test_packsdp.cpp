#include <doctest.h>

TEST_SUITE("packsdp") {}
