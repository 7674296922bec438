#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <vector>

namespace tk {

using Rational = boost::multiprecision::cpp_rational;

std::string to_string(const Rational& q);  // "p/q", or "p" when q == 1

// Truncated power series in one variable with exact rational coefficients.
class FormalSeries {
 public:
  FormalSeries(std::string variable, int max_degree);

  static FormalSeries exp(const std::string& variable, int max_degree);
  // x / (1 - e^{-x})
  static FormalSeries todd(const std::string& variable, int max_degree);

  const std::string& variable() const { return var_; }
  int max_degree() const { return static_cast<int>(c_.size()) - 1; }
  const Rational& operator[](int k) const { return c_.at(k); }
  Rational& operator[](int k) { return c_.at(k); }

  FormalSeries operator*(const FormalSeries& o) const;
  FormalSeries inverse() const;  // requires a nonzero constant term

 private:
  std::string var_;
  std::vector<Rational> c_;
};

struct GrrResult {
  FormalSeries todd;
  FormalSeries ch;
  Rational degree4_coefficient;  // coefficient of x^2 in Todd(x) ch(x)
  Rational det_coefficient;      // c1(det Lambda) = det_coefficient * e1
  Rational line_coefficient;     // c1(L) = line_coefficient * e1, L = det^12
};

GrrResult grr_check(int max_degree);

}  // namespace tk
