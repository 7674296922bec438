#include "doctest.h"
#include "tk/series.hpp"

using tk::Rational;

TEST_CASE("todd series against Bernoulli numbers") {
  auto t = tk::FormalSeries::todd("x", 8);
  CHECK(t[0] == Rational(1));
  CHECK(t[1] == Rational(1, 2));
  CHECK(t[2] == Rational(1, 12));
  CHECK(t[3] == Rational(0));
  CHECK(t[4] == Rational(-1, 720));
  CHECK(t[6] == Rational(1, 30240));
}

TEST_CASE("series inverse is a two-sided inverse") {
  auto e = tk::FormalSeries::exp("x", 10);
  auto p = e * e.inverse();
  CHECK(p[0] == Rational(1));
  for (int k = 1; k <= 10; ++k) CHECK(p[k] == Rational(0));
  CHECK(e.inverse()[3] == Rational(-1, 6));
}

TEST_CASE("grr degree-4 coefficient and line bundle relation") {
  auto r = tk::grr_check(4);
  CHECK(r.degree4_coefficient == Rational(13, 12));
  CHECK(r.line_coefficient == Rational(13));
  CHECK(tk::to_string(r.degree4_coefficient) == "13/12");
  CHECK_THROWS(tk::grr_check(3));
}

TEST_CASE("grr coefficients stable under higher truncation") {
  auto a = tk::grr_check(4), b = tk::grr_check(16);
  for (int k = 0; k <= 4; ++k) {
    CHECK(a.todd[k] == b.todd[k]);
    CHECK(a.ch[k] == b.ch[k]);
  }
  CHECK(a.degree4_coefficient == b.degree4_coefficient);
}
