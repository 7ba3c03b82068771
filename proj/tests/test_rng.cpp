// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "hfseq/rng.hpp"

using namespace hfseq;

TEST_CASE("same seed and stream reproduce the draw sequence") {
  Rng a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42, 3), d(42, 3);
  for (int i = 0; i < 100; ++i) CHECK(c.normal() == d.normal());
}

TEST_CASE("streams with the same seed differ") {
  Rng a(42, 0), b(42, 1);
  int equal = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next_u64() == b.next_u64()) ++equal;
  CHECK(equal == 0);
}

TEST_CASE("uniform lies in [0,1) and has a sane mean") {
  Rng rng(7);
  double sum = 0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 20000 - 0.5) < 0.01);
}

TEST_CASE("normal moments") {
  Rng rng(11);
  double sum = 0, sq = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sq / n - 1.0) < 0.03);
}

TEST_CASE("below is in range and covers all residues") {
  Rng rng(3);
  bool seen[5] = {false, false, false, false, false};
  for (int i = 0; i < 200; ++i) {
    const auto x = rng.below(5);
    REQUIRE(x < 5);
    seen[x] = true;
  }
  for (bool s : seen) CHECK(s);
}
