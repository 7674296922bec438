#include "tk/series.hpp"

#include <stdexcept>

namespace tk {

std::string to_string(const Rational& q) {
  auto num = boost::multiprecision::numerator(q);
  auto den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

FormalSeries::FormalSeries(std::string variable, int max_degree)
    : var_(std::move(variable)), c_(max_degree + 1, Rational(0)) {
  if (max_degree < 0) throw std::invalid_argument("negative truncation degree");
}

FormalSeries FormalSeries::exp(const std::string& variable, int max_degree) {
  FormalSeries s(variable, max_degree);
  Rational term(1);
  for (int k = 0; k <= max_degree; ++k) {
    if (k > 0) term /= k;
    s.c_[k] = term;
  }
  return s;
}

FormalSeries FormalSeries::todd(const std::string& variable, int max_degree) {
  // (1 - e^{-x})/x = sum_k (-1)^k x^k / (k+1)!
  FormalSeries q(variable, max_degree);
  Rational fact(1);
  for (int k = 0; k <= max_degree; ++k) {
    fact *= (k + 1);
    q.c_[k] = Rational((k % 2) ? -1 : 1) / fact;
  }
  return q.inverse();
}

FormalSeries FormalSeries::operator*(const FormalSeries& o) const {
  if (var_ != o.var_) throw std::invalid_argument("series in different variables");
  int n = std::min(max_degree(), o.max_degree());
  FormalSeries r(var_, n);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; i + j <= n; ++j) r.c_[i + j] += c_[i] * o.c_[j];
  return r;
}

FormalSeries FormalSeries::inverse() const {
  if (c_[0] == 0) throw std::domain_error("series has zero constant term");
  FormalSeries r(var_, max_degree());
  r.c_[0] = 1 / c_[0];
  for (int k = 1; k <= max_degree(); ++k) {
    Rational acc(0);
    for (int j = 1; j <= k; ++j) acc += c_[j] * r.c_[k - j];
    r.c_[k] = -acc / c_[0];
  }
  return r;
}

GrrResult grr_check(int max_degree) {
  if (max_degree < 4) throw std::invalid_argument("grr_check needs max_degree >= 4");
  // x = c1 has real degree 2, so the real degree-4 part is the x^2 coefficient.
  auto todd = FormalSeries::todd("x", max_degree);
  auto ch = FormalSeries::exp("x", max_degree);
  auto prod = todd * ch;
  return GrrResult{todd, ch, prod[2], prod[2], 12 * prod[2]};
}

}  // namespace tk
