#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "robreg/rng.hpp"

using robreg::Rng;

TEST_SUITE("rng") {

TEST_CASE("equal seeds replay the same sequence") {
  auto a = Rng(42).stream(7);
  auto b = Rng(42).stream(7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct streams are distinct") {
  auto a = Rng(42).stream(1);
  auto b = Rng(42).stream(2);
  int agree = 0;
  for (int i = 0; i < 64; ++i) {
    if (a.next_u64() == b.next_u64()) ++agree;
  }
  CHECK(agree == 0);
}

TEST_CASE("a copied stream continues from the copied point") {
  auto a = Rng(9).stream(0);
  for (int i = 0; i < 10; ++i) a.next_u64();
  auto b = a;
  for (int i = 0; i < 50; ++i) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("derive produces distinct sub-seeds") {
  const Rng rng(1234);
  std::set<std::uint64_t> seen;
  for (std::uint64_t id = 0; id < 1000; ++id) seen.insert(rng.derive(id));
  CHECK(seen.size() == 1000);
}

TEST_CASE("uniform stays strictly inside the unit interval") {
  auto st = Rng(5).stream(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = st.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform_index respects the bound and covers it") {
  auto st = Rng(5).stream(4);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 50000; ++i) {
    const auto k = st.uniform_index(10);
    REQUIRE(k < 10);
    ++counts[static_cast<int>(k)];
  }
  for (int c : counts) {
    // Expected 5000 per cell; 4 sigma is about 280.
    CHECK(c > 4500);
    CHECK(c < 5500);
  }
}

TEST_CASE("normal moments") {
  auto st = Rng(17).stream(0);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = st.normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("student t with five degrees of freedom has the right variance") {
  auto st = Rng(23).stream(0);
  const int n = 400000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = st.student_t(5);
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  // Var = dof / (dof - 2) = 5/3. The fourth moment exists but is large, so
  // the variance estimate converges slowly; the band is wide on purpose.
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(5.0 / 3.0).epsilon(0.08));
}

}  // TEST_SUITE
