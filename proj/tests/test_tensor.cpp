#include "doctest.h"
#include "mhparse/tensor.hpp"

using namespace mhparse;

TEST_CASE("tensor construction and indexing") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  t.at(1, 2) = 5.0;
  CHECK(t[5] == 5.0);
  CHECK(t.at(0, 0) == 0.0);

  Tensor u({2, 2, 2});
  u.at(1, 0, 1) = 3.0;
  CHECK(u[5] == 3.0);

  CHECK_THROWS_AS(Tensor({2, 2}, {1.0}), argument_error);
}

TEST_CASE("matmul against hand result") {
  Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b({3, 2}, {7, 8, 9, 10, 11, 12});
  Tensor c = matmul(a, b);
  CHECK(c.at(0, 0) == doctest::Approx(58));
  CHECK(c.at(0, 1) == doctest::Approx(64));
  CHECK(c.at(1, 0) == doctest::Approx(139));
  CHECK(c.at(1, 1) == doctest::Approx(154));
  CHECK_THROWS_AS(matmul(a, a), argument_error);
}

TEST_CASE("transpose round trip") {
  Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor t = transpose(transpose(a));
  for (int i = 0; i < a.size(); ++i) CHECK(t[i] == a[i]);
}

TEST_CASE("require_finite rejects NaN") {
  Tensor a({2}, {1.0, 0.0});
  CHECK_NOTHROW(require_finite(a, "a"));
  a[1] = std::nan("");
  CHECK_THROWS_AS(require_finite(a, "a"), contract_error);
}

TEST_CASE("bilinear upsample preserves constants and interpolates") {
  Tensor c = Tensor::full({3, 3}, 2.5);
  Tensor up = bilinear_upsample(c, 9, 9);
  for (int i = 0; i < up.size(); ++i) CHECK(up[i] == doctest::Approx(2.5));

  // 2x upsample of a linear ramp stays within the source range
  Tensor ramp({1, 4}, {0, 1, 2, 3});
  Tensor u2 = bilinear_upsample(ramp, 1, 8);
  for (int i = 0; i < u2.size(); ++i) {
    CHECK(u2[i] >= 0.0);
    CHECK(u2[i] <= 3.0);
  }
  CHECK(u2[0] == doctest::Approx(0.0));
  CHECK(u2[7] == doctest::Approx(3.0));
}
