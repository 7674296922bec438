#include "doctest.h"
#include "tk/cech.hpp"
#include "tk/cherncalc.hpp"

#include <cmath>
#include <random>

using namespace tk;

namespace {

double max_abs(const ScalarForm& w) {
  double m = 0;
  for (auto v : w) m = std::max(m, std::abs(v));
  return m;
}

CMatrix scalar(cd v) { return CMatrix::Constant(1, 1, v); }

FiberSymbol loop_symbol(int k) {
  FiberSymbol s;
  s.rank = 1;
  s.modes = {k};
  s.coeffs = {scalar(1.0)};
  return s;
}

// projector onto the line of y . sigma with eigenvalue +1
CMatrix projector(const std::array<double, 3>& y) {
  CMatrix e(2, 2);
  e << 1 + y[2], cd(y[0], -y[1]), cd(y[0], y[1]), 1 - y[2];
  return 0.5 * e;
}

}  // namespace

TEST_CASE("operator-valued form algebra") {
  OpForm a(4, 1), b(4, 1);
  a.at(1) = scalar(2.0);
  b.at(2) = scalar(3.0);
  auto ab = wedge(a, b), ba = wedge(b, a);
  CHECK(std::abs(ab.c[3](0, 0) - 6.0) < 1e-15);
  CHECK(std::abs(ba.c[3](0, 0) + 6.0) < 1e-15);

  // omega = e01 + e23: exp = 1 + omega + e0123
  OpForm w(4, 1);
  w.at(3) = scalar(1.0);
  w.at(12) = scalar(1.0);
  auto e = exp_form(w);
  CHECK(std::abs(e.c[0](0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(e.c[15](0, 0) - 1.0) < 1e-15);
  CHECK(mask_degree(15) == 4);

  // matrix-valued 1-forms: (theta ^ theta)_{01} = [theta_0, theta_1]
  OpForm th(2, 2);
  th.at(1) = (CMatrix(2, 2) << 0, 1, 0, 0).finished();
  th.at(2) = (CMatrix(2, 2) << 0, 0, 1, 0).finished();
  auto t2 = wedge(th, th);
  CMatrix comm = th.c[1] * th.c[2] - th.c[2] * th.c[1];
  CHECK((t2.c[3] - comm).norm() < 1e-15);
}

TEST_CASE("odd character of the identity vanishes") {
  auto g = TwistedGeometry::make(1, 1, 0.3);
  double p[4] = {0.3, 0.2, -0.4, 1.0};
  auto c = g.at(4, p, true);
  CMatrix D = ModeBand{-3, 3, 1}.D();
  CMatrix I = CMatrix::Identity(7, 7);
  std::vector<CMatrix> dI(4, CMatrix::Zero(7, 7));
  CHECK(max_abs(odd_chern_point(I, dI, c, D)) < 1e-13);
  CMatrix S = I;
  S(2, 2) = 0;
  CHECK_THROWS_AS(odd_chern_point(S, dI, c, D), ValidationError);
  CHECK_THROWS_AS(even_chern_point(2.0 * I, dI, I, c, D), ValidationError);
}

TEST_CASE("winding loop pairs to its winding number") {
  for (int k : {-2, -1, 1, 3}) {
    double total = 0;
    const int samples = 16;
    for (int s = 0; s < samples; ++s) {
      double x = (s + 0.5) / samples;
      CMatrix a = scalar(std::exp(cd(0, 2 * M_PI * k * x)));
      std::vector<CMatrix> da{a * cd(0, 2 * M_PI * k)};
      auto w = odd_chern_point(a, da, LocalConnection::flat(1), CMatrix::Zero(1, 1));
      CHECK(std::abs(w[1].imag()) < 1e-14);
      total += w[1].real() / samples;
    }
    CHECK(std::abs(total - k) < 1e-12);
  }
}

TEST_CASE("t-quadrature is exact beyond half the form dimension") {
  auto g = TwistedGeometry::make(1, 1, 0.3);
  UnitaryFamily A;
  double p[4] = {0.41, -0.3, 1.0, 0.25};
  auto w12 = odd_chern_at(A, g, 2, p, 12), w8 = odd_chern_at(A, g, 2, p, 8), w3 = odd_chern_at(A, g, 2, p, 3);
  for (std::size_t m = 0; m < w12.size(); ++m) {
    CHECK(std::abs(w12[m] - w8[m]) < 1e-13);
    CHECK(std::abs(w12[m] - w3[m]) < 1e-13);
  }
}

TEST_CASE("twisted odd character is closed pointwise and real") {
  auto g = TwistedGeometry::make(1, 1, 0.3);
  UnitaryFamily A;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-0.8, 0.8), ux(0.0, 1.0);
  for (int patch : {0, 3, 4}) {
    auto t = TwistedGeometry::tangent_axes(patch);
    auto fn = [&](const double* l) {
      double p[4] = {l[0], 0, 0, 0};
      p[1 + patch_axis(patch)] = patch_sign(patch);
      p[1 + t[0]] = l[1];
      p[1 + t[1]] = l[2];
      return odd_chern_at(A, g, patch, p);
    };
    double l[4] = {ux(rng), u(rng), u(rng), ux(rng)};
    CHECK(pointwise_closedness(fn, 4, l) < 1e-8);
    for (auto v : fn(l)) CHECK(std::abs(v.imag()) < 1e-10);
  }
}

TEST_CASE("deck shift leaves the odd character unchanged") {
  auto g = TwistedGeometry::make(1, 1, 0.3);
  UnitaryFamily A;
  CHECK(deck_shift_defect(A, g, 6, 3) < 1e-10);
}

TEST_CASE("odd character subcomplex and factorization residuals shrink like h^2") {
  auto g = TwistedGeometry::make(1, 1, 0.3);
  UnitaryFamily A;
  OddChernSettings s;
  s.patch = 4;
  s.fiber_points = 3;
  std::vector<double> h, sub, fac;
  for (int n : {2, 4}) {
    s.M = s.n = n;
    auto r = odd_chern(A, g, s);
    h.push_back(r.h);
    sub.push_back(r.ch.subcomplex_residual);
    fac.push_back(r.ch.factorization_residual);
    CHECK(r.imaginary_part < 1e-10);
  }
  CHECK(std::log(sub[0] / sub[1]) / std::log(h[0] / h[1]) >= 1.5);
  CHECK(std::log(fac[0] / fac[1]) / std::log(h[0] / h[1]) >= 1.5);
}

TEST_CASE("even character of a constant idempotent vanishes") {
  CMatrix e0 = CMatrix::Zero(4, 4);
  e0(0, 0) = e0(2, 2) = 1;
  auto c = LocalConnection::flat(3);
  std::vector<CMatrix> de(3, CMatrix::Zero(4, 4));
  CHECK(max_abs(even_chern_point(e0, de, e0, c, CMatrix::Zero(4, 4))) < 1e-15);
}

TEST_CASE("even character of the Bott projector has Chern number -1") {
  CMatrix e0 = CMatrix::Zero(2, 2);
  e0(0, 0) = 1;
  auto w = [&](int patch, const double* p) {
    auto ax = TwistedGeometry::tangent_axes(patch);
    auto e = projector(sphere_point(p + 1));
    std::vector<CMatrix> de(3, CMatrix::Zero(2, 2));
    const double h = 1e-4;
    for (int i = 0; i < 2; ++i) {
      double qp[4] = {p[0], p[1], p[2], p[3]}, qm[4] = {p[0], p[1], p[2], p[3]};
      qp[1 + ax[i]] += h;
      qm[1 + ax[i]] -= h;
      de[1 + i] = (projector(sphere_point(qp + 1)) - projector(sphere_point(qm + 1))) / (2 * h);
    }
    return even_chern_point(e, de, e0, LocalConnection::flat(3), CMatrix::Zero(2, 2));
  };
  auto r = pair_on_sphere(w, 3, 6);
  CHECK(std::abs(r.degree0) < 1e-12);
  CHECK(std::abs(r.degree2 + 1) < 1e-5);
}

TEST_CASE("symbol quantization and index idempotents") {
  CHECK(transition_step(-1.5) == 0.0);
  CHECK(transition_step(1.5) == 1.0);
  CHECK(std::abs(transition_step(0.0) - 0.5) < 1e-15);
  CHECK(std::abs(transition_step(0.3) + transition_step(-0.3) - 1) < 1e-15);

  SymbolData id{FiberSymbol::identity(2), FiberSymbol::identity(2)};
  ModeBand b{-3, 3, 2};
  CHECK((quantize_ends(id, b, 0.4) - CMatrix::Identity(14, 14)).norm() < 1e-15);

  auto w = loop_symbol(2);
  auto wi = w.adjoint();
  CHECK(std::abs((w.at(0.3) * wi.at(0.3))(0, 0) - 1.0) < 1e-15);

  double p[4] = {0.2, 0.1, -0.3, 1.0};
  for (double f : {0.0, 0.37, -2.6}) {
    auto ip = index_idempotent_family(bott_family().symbol(4, p), {}, f, {});
    CHECK(std::abs(ip.trace - 1.0) < 1e-12);
    CHECK(ip.idempotency_residual < 1e-12);
    CHECK(ip.edge_mass < 1e-12);
    auto ih = index_idempotent_family(hopf_su2_family().symbol(4, p), {}, f, {});
    CHECK(std::abs(ih.trace) < 1e-12);
    CHECK(ih.idempotency_residual < 1e-12);
  }
  for (int k : {-2, 1, 3}) {
    auto ip = index_idempotent_family(SymbolData{loop_symbol(k), FiberSymbol::identity(1)}, {}, 0.2, {});
    CHECK(std::abs(ip.trace.real() - k) < 1e-12);
  }

  FiberSymbol bad = loop_symbol(1);
  bad.coeffs[0] *= 2.0;
  CHECK_THROWS_AS(index_idempotent_family(SymbolData{bad, FiberSymbol::identity(1)}, {}, 0.0, {}), ValidationError);
}

TEST_CASE("Bott family: analytic and topological characters agree") {
  auto r = compare_bott_index(2, 6);
  CHECK(std::abs(r.analytic.degree0 - 1) < 1e-12);
  CHECK(r.analytic.degree0_spread < 1e-12);
  CHECK(std::abs(r.analytic.degree2 + 1) < 1e-6);
  CHECK(std::abs(r.topological.degree0 - 1) < 1e-12);
  CHECK(std::abs(r.topological.degree2 + 1) < 1e-6);
  CHECK(r.difference < 1e-10);
}

TEST_CASE("relative symbol character") {
  for (int k : {-2, 0, 1, 3}) {
    SymbolData s{loop_symbol(k), FiberSymbol::identity(1)};
    CHECK(std::abs(relative_fiber_pairing(s) - k) < 1e-12);
  }
  SymbolData id{FiberSymbol::identity(2), FiberSymbol::identity(2)};
  std::vector<SymbolData> zero(3, SymbolData{FiberSymbol{2, {0}, {CMatrix::Zero(2, 2)}}, FiberSymbol{2, {0}, {CMatrix::Zero(2, 2)}}});
  auto r = relative_symbol_chern(id, zero, 0.3);
  CHECK(max_abs(r.plus) < 1e-15);
  CHECK(max_abs(r.minus) < 1e-15);
  CHECK(max_abs(r.even) == 0.0);

  auto g = TwistedGeometry::make(1, 1, 0.0);
  auto r6 = relative_cocycle_residual(rotating_bott_family(), g, 6);
  auto r12 = relative_cocycle_residual(rotating_bott_family(), g, 12);
  CHECK(std::log(r6.residual / r12.residual) / std::log(r6.h / r12.h) >= 1.5);
}

TEST_CASE("twisted analytic character is closed with vanishing degree 0") {
  auto g = TwistedGeometry::make(1, 1, 0.3);
  auto fam = hopf_su2_family();
  double p[4] = {0.3, 0.2, -0.1, 1.0};
  auto a = analytic_character_at(fam, &g, 4, p), t = topological_character_at(fam, &g, 4, p);
  CHECK(std::abs(a[0]) < 1e-12);
  for (int m = 0; m < 8; ++m) CHECK(std::abs(a[m] - t[m]) < 1e-8);
}
