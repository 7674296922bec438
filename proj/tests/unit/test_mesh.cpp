#include "doctest.h"
#include "tk/mesh.hpp"

#include <cmath>
#include <random>

using namespace tk;

namespace {

std::shared_ptr<const ProductMesh> make(std::vector<Factor> f) {
  return std::make_shared<const ProductMesh>(std::move(f));
}

DiscreteForm random_form(std::shared_ptr<const ProductMesh> m, int k, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  Eigen::VectorXd v(m->count(k));
  for (auto& x : v) x = U(rng);
  return DiscreteForm::homogeneous(m, k, v);
}

// area form of the unit sphere normalized to total 1, in cube coordinates
double area_component(const double* P, const int* axes) {
  double J[3][3];
  sphere_jacobian(P, J);
  auto y = sphere_point(P);
  double u[3], v[3];
  for (int i = 0; i < 3; ++i) {
    u[i] = J[i][axes[0]];
    v[i] = J[i][axes[1]];
  }
  double c[3] = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  return (y[0] * c[0] + y[1] * c[1] + y[2] * c[2]) / (4 * M_PI);
}

}  // namespace

TEST_CASE("cube sphere has Euler characteristic 2") {
  for (int n : {1, 2, 4}) {
    auto s = cube_sphere(n);
    CHECK(s.count(0) - s.count(1) + s.count(2) == 2);
    CHECK(s.count(2) == 6 * n * n);
  }
  auto f = face_patch(3, 2, 1);
  CHECK(f.count(0) == 16);
  CHECK(f.count(2) == 9);
}

TEST_CASE("discrete d squares to zero and integrates to zero") {
  auto m = make({circle_grid(5), cube_sphere(2)});
  for (int k = 0; k + 2 <= m->dim(); ++k) {
    auto w = random_form(m, k, 11 + k);
    CHECK(d(d(w)).max_abs() <= 1e-12);
  }
  auto s = make({cube_sphere(3)});
  auto a = random_form(s, 1, 5);
  CHECK(std::abs(s->top_chain().dot(d(a)[2])) <= 1e-12);
}

TEST_CASE("cubical wedge satisfies the Leibniz rule exactly") {
  auto m = make({circle_grid(4), cube_sphere(2), circle_grid(3)});
  for (int k = 0; k <= 2; ++k)
    for (int l = 0; k + l + 1 <= m->dim() && l <= 2; ++l) {
      auto a = random_form(m, k, 100 + 7 * k + l), b = random_form(m, l, 200 + k + 3 * l);
      auto lhs = d(wedge(a, b));
      auto rhs = wedge(d(a), b) + wedge(a, d(b)) * ((k % 2) ? -1.0 : 1.0);
      CHECK((lhs - rhs).max_abs() <= 1e-12);
    }
}

TEST_CASE("wedge with the unit function is the identity") {
  auto m = make({circle_grid(4), circle_grid(5)});
  auto one = DiscreteForm::homogeneous(m, 0, Eigen::VectorXd::Ones(m->count(0)));
  auto a = random_form(m, 1, 3);
  CHECK((wedge(one, a) - a).max_abs() <= 1e-14);
  CHECK((wedge(a, one) - a).max_abs() <= 1e-14);
}

TEST_CASE("de Rham map commutes with d and wedge converges at second order") {
  SmoothForm f{0, [](const double* p, const int*) { return std::sin(2 * M_PI * p[0]) * std::cos(2 * M_PI * p[1]); }};
  SmoothForm df{1, [](const double* p, const int* ax) {
                  return ax[0] == 0 ? 2 * M_PI * std::cos(2 * M_PI * p[0]) * std::cos(2 * M_PI * p[1])
                                    : -2 * M_PI * std::sin(2 * M_PI * p[0]) * std::sin(2 * M_PI * p[1]);
                }};
  SmoothForm g{1, [](const double* p, const int* ax) {
                 return ax[0] == 0 ? std::cos(2 * M_PI * p[1]) : 1.0 + 0.5 * std::sin(2 * M_PI * p[0]);
               }};
  SmoothForm fg{2, [&](const double* p, const int*) {
                  int a0 = 0, a1 = 1;
                  return df.component(p, &a0) * g.component(p, &a1) - df.component(p, &a1) * g.component(p, &a0);
                }};
  double prev = 0;
  for (int M : {8, 16, 32}) {
    auto m = make({circle_grid(M), circle_grid(M)});
    auto R0 = DiscreteForm::homogeneous(m, 0, de_rham(*m, f, 6));
    auto R1 = DiscreteForm::homogeneous(m, 1, de_rham(*m, df, 6));
    CHECK((d(R0) - R1).max_abs() <= 1e-12);
    auto G = DiscreteForm::homogeneous(m, 1, de_rham(*m, g, 6));
    auto err = (wedge(R1, G) - DiscreteForm::homogeneous(m, 2, de_rham(*m, fg, 6))).density_sup();
    if (prev > 0) CHECK(std::log2(prev / err) >= 1.8);
    prev = err;
  }
}

TEST_CASE("sphere area integrates to one over the fundamental chain") {
  auto s = make({cube_sphere(4)});
  auto area = de_rham(*s, SmoothForm{2, area_component}, 8);
  CHECK(s->top_chain().dot(area) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("pullback commutes with d and wedge") {
  auto base = make({circle_grid(4), cube_sphere(1)});
  auto tot = make({circle_grid(4), cube_sphere(1), circle_grid(5)});
  auto a = random_form(base, 1, 8), b = random_form(base, 1, 9);
  auto pa = pullback(a, tot, {0, 1}), pb = pullback(b, tot, {0, 1});
  CHECK((d(pa) - pullback(d(a), tot, {0, 1})).max_abs() <= 1e-12);
  CHECK((wedge(pa, pb) - pullback(wedge(a, b), tot, {0, 1})).max_abs() <= 1e-12);
}

TEST_CASE("fiber interior product and Lie derivative") {
  auto m = make({circle_grid(6), circle_grid(8)});
  SmoothForm dtheta{1, [](const double*, const int* ax) { return ax[0] == 1 ? 1.0 : 0.0; }};
  auto g = DiscreteForm::homogeneous(m, 1, de_rham(*m, dtheta, 2));
  auto ig = interior_fiber(g, 1);
  CHECK((ig[0] - Eigen::VectorXd::Ones(m->count(0))).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(lie_fiber(g, 1).max_abs() <= 1e-12);
  SmoothForm dx{1, [](const double*, const int* ax) { return ax[0] == 0 ? 1.0 : 0.0; }};
  auto w = wedge(DiscreteForm::homogeneous(m, 1, de_rham(*m, dx, 2)), g);
  // i(dx ^ dtheta) = -dx
  auto iw = interior_fiber(w, 1);
  CHECK((iw[1] + de_rham(*m, dx, 2)).cwiseAbs().maxCoeff() <= 1e-12);
}
