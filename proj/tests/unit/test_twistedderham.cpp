#include "doctest.h"
#include "tk/twistedderham.hpp"

#include <random>

using namespace tk;

namespace {

DiscreteForm random_form(std::shared_ptr<const ProductMesh> m, int k, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  Eigen::VectorXd v(m->count(k));
  for (auto& x : v) x = U(rng);
  return DiscreteForm::homogeneous(m, k, v);
}

}  // namespace

TEST_CASE("twisted d reduces to d and sends 1 to the twist") {
  auto s = make_scenario(6, 1, 1, 1, 0.2);
  auto one = DiscreteForm::homogeneous(s.base, 0, Eigen::VectorXd::Ones(s.base->count(0)));
  CHECK((twisted_d(one, s.twist) - s.twist.delta_bar).max_abs() <= 1e-15);
  auto v = random_form(s.base, 1, 4);
  CHECK((twisted_d(v, zero_twist(s.base)) - d(v)).max_abs() == 0.0);
  REQUIRE(s.twist.periods.size() == 1);
  CHECK(std::abs(s.twist.periods[0] - 1) <= 1e-6);
}

TEST_CASE("twisted d squares to zero") {
  auto s = make_scenario(8, 2, 1, 2, 0.3);
  auto v = random_trig_form(s.base, 7) + random_form(s.base, 0, 1) + random_form(s.base, 2, 2);
  CHECK(twisted_square_residual(v, s.twist) <= 1e-12);
}

TEST_CASE("non-closed or mixed twists are rejected") {
  auto s = make_scenario(6, 1, 1, 1, 0.0);
  CHECK_THROWS_AS(make_twist(random_form(s.base, 2, 3)), StructuralError);
}

TEST_CASE("twisted Hodge dimensions on S1 x S2") {
  auto s = make_scenario(8, 1, 1, 1, 0.0);
  auto h0 = twisted_cohomology_dims(s.base, zero_twist(s.base));
  CHECK(h0.even_dim == 2);
  CHECK(h0.odd_dim == 2);
  CHECK_FALSE(h0.ambiguous);
  auto h1 = twisted_cohomology_dims(s.base, s.twist);
  CHECK(h1.even_dim == 1);
  CHECK(h1.odd_dim == 1);
  CHECK_FALSE(h1.ambiguous);
  // twisting by an exact form does not change the dimensions
  auto eta = random_form(s.base, 2, 9);
  auto h2 = twisted_cohomology_dims(s.base, make_twist(s.twist.delta_bar + d(eta)));
  CHECK(h2.even_dim == 1);
  CHECK(h2.odd_dim == 1);
  auto h3 = twisted_cohomology_dims(s.base, make_twist(d(eta)));
  CHECK(h3.even_dim == 2);
  CHECK(h3.odd_dim == 2);
}

TEST_CASE("subcomplex map of 1 and its conditions") {
  auto s = make_scenario(8, 2, 1, 1, 0.25, 8);
  auto one = DiscreteForm::homogeneous(s.base, 0, Eigen::VectorXd::Ones(s.base->count(0)));
  auto vt = subcomplex_map(one, *s.total, s.alpha);
  const auto& ch = s.total->charts[2];
  auto pa = pullback(restrict_form(s.alpha, ch.base), ch.total, {0, 1});
  auto expect = DiscreteForm::homogeneous(ch.total, 0, Eigen::VectorXd::Ones(ch.total->count(0))) - wedge(pa, ch.gamma);
  CHECK((vt[2] - expect).max_abs() <= 1e-14);
  auto r = subcomplex_conditions(vt, *s.total, s.alpha);
  CHECK(r.lie <= 1e-12);
  CHECK(r.iota <= 1e-3);
}

TEST_CASE("subcomplex map conjugates d to the twisted differential") {
  auto s = make_scenario(8, 2, 1, 1, 0.25, 8);
  auto v = random_trig_form(s.base, 3);
  double c = conjugation_check(v, *s.total, s.alpha, s.twist);
  MESSAGE("conjugation residual ", c);
  CHECK(c <= 1e-10);
  CHECK(subcomplex_conditions(subcomplex_map(v, *s.total, s.alpha), *s.total, s.alpha).lie <= 1e-12);
  auto flat = make_scenario(8, 2, 1, 0, 0.0, 8);
  auto w = random_trig_form(flat.base, 3);
  CHECK(conjugation_check(w, *flat.total, flat.alpha, flat.twist) <= 1e-12);
  auto wt = subcomplex_map(w, *flat.total, flat.alpha);
  CHECK(subcomplex_conditions(wt, *flat.total, flat.alpha).iota <= 1e-12);
}

TEST_CASE("subcomplex interior condition converges under refinement") {
  std::vector<double> res;
  for (int n : {2, 4}) {
    auto s = make_scenario(4 * n, n, 1, 1, 0.25, 8);
    auto v = random_trig_form(s.base, 3);
    res.push_back(subcomplex_conditions(subcomplex_map(v, *s.total, s.alpha), *s.total, s.alpha).iota);
  }
  MESSAGE("iota residuals ", res[0], " ", res[1]);
  CHECK(res[0] / res[1] >= 2.5);
}
