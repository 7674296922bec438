#include "doctest.h"
#include "tk/cech.hpp"
#include "tk/sclquant.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <string>

using namespace tk;

namespace {

CMatrix sc(cd v) { return CMatrix::Constant(1, 1, v); }

double g1(double th) { return std::cos(2 * M_PI * th) + 0.5 * std::sin(4 * M_PI * th); }

SclSymbol gauss() {
  return SclSymbol(1, [](double, double xi) { return sc(std::exp(-xi * xi)); }, 6.5);
}
SclSymbol g_gauss() {
  return SclSymbol(1, [](double th, double xi) { return sc(g1(th) * std::exp(-xi * xi)); }, 6.5);
}

struct KernelEntry {
  double xi;
  int j;
  bool imag;
};

// int_0^1 g1(theta) e^{-xi^2} e^{-2 pi i j theta} d theta by adaptive quadrature
cd brute_entry(double xi, int j) {
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(200);
  cd out;
  for (bool imag : {false, true}) {
    KernelEntry e{xi, j, imag};
    gsl_function f;
    f.params = &e;
    f.function = [](double th, void* p) {
      auto* e = static_cast<KernelEntry*>(p);
      cd v = g1(th) * std::exp(-e->xi * e->xi) * std::polar(1.0, -2 * M_PI * e->j * th);
      return e->imag ? v.imag() : v.real();
    };
    double r, err;
    gsl_integration_qag(&f, 0, 1, 1e-14, 1e-12, 200, GSL_INTEG_GAUSS61, ws, &r, &err);
    (imag ? out.imag(r) : out.real(r));
  }
  gsl_integration_workspace_free(ws);
  return out;
}

}  // namespace

TEST_CASE("symbols must decay outside their support radius") {
  CHECK_THROWS_AS(SclSymbol(1, [](double, double xi) { return sc(1.0 / (1 + xi * xi)); }, 4), ValidationError);
  CHECK_THROWS_AS(SclSymbol(2, [](double, double) { return sc(0.0); }, 4), ValidationError);
  CHECK_NOTHROW(gauss());
}

TEST_CASE("quantization of simple symbols") {
  SclSymbol zero(1, [](double, double) { return sc(0.0); }, 1);
  CHECK(quantize(zero, 0.25, 20).matrix.norm() == 0);

  const double eps = 0.125;
  auto K = quantize(gauss(), eps, required_modes(gauss(), eps));
  for (int m = -K.N; m <= K.N; ++m)
    for (int k = -K.N; k <= K.N; ++k) {
      cd want = m == k ? cd(std::exp(-eps * k * eps * k)) : cd(0);
      CHECK(std::abs(K.at(m, k) - want) < 1e-15);
    }

  try {
    quantize(gauss(), eps, 20);
    FAIL("band too small was accepted");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("need N >= " + std::to_string(required_modes(gauss(), eps))) != std::string::npos);
  }

  auto G = quantize(g_gauss(), 0.25, 60);
  double worst = 0;
  for (int k : {-20, -3, 0, 1, 7}) {
    double xi = 0.25 * k;
    for (int j = -3; j <= 3; ++j) worst = std::max(worst, std::abs(G.at(k + j, k) - brute_entry(xi, j)));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("symbol map inverts quantization on the grid") {
  for (auto& p : scl_catalog_pairs()) {
    for (auto* s : {&p.a, &p.b}) {
      const double eps = 1.0 / 16;
      int N = required_modes(*s, eps), kmax = N - s->theta_grid / 2;
      auto sig = scl_symbol(quantize(*s, eps, N), s->theta_grid, kmax);
      double worst = 0;
      for (int k = -kmax; k <= kmax; ++k)
        for (int g = 0; g < s->theta_grid; ++g)
          worst = std::max(worst, (sig[k + kmax][g] - (*s)(s->theta_at(g), eps * k)).cwiseAbs().maxCoeff());
      CHECK(worst < 1e-13);
    }
  }
}

TEST_CASE("quantization is linear and respects the reflection symmetry") {
  auto a = gauss(), b = g_gauss();
  SclSymbol ab(1, [=](double th, double xi) { return CMatrix(2.0 * a(th, xi) - cd(0, 3) * b(th, xi)); }, 6.5);
  auto Ka = quantize(a, 0.2, 50), Kb = quantize(b, 0.2, 50), Kab = quantize(ab, 0.2, 50);
  CHECK((Kab.matrix - 2.0 * Ka.matrix + cd(0, 3) * Kb.matrix).cwiseAbs().maxCoeff() < 1e-14);

  // a(theta, -xi) = conj a(theta, xi)  =>  K(-m, -k) = conj K(m, k)
  SclSymbol r(1,
              [](double th, double xi) {
                return sc(cd(std::cos(2 * M_PI * th), xi * std::sin(2 * M_PI * th)) * std::exp(-xi * xi));
              },
              6.5);
  auto K = quantize(r, 0.2, 50);
  double worst = 0;
  for (int m = -50; m <= 50; ++m)
    for (int k = -50; k <= 50; ++k) worst = std::max(worst, std::abs(K.at(-m, -k) - std::conj(K.at(m, k))));
  CHECK(worst < 1e-15);
}

TEST_CASE("composition defect is O(eps)") {
  for (auto& p : scl_catalog_pairs()) {
    auto r = scl_composition_defect(p.a, p.b);
    CAPTURE(p.name);
    CHECK(r.slope >= 0.9);
  }
  // a xi-only factor on the right composes exactly
  auto exact = scl_composition_defect(g_gauss(), gauss(), {0.25, 0.125, 0.0625, 0.03125});
  for (double d : exact.defect) CHECK(d < 1e-13);
  CHECK_THROWS_AS(scl_composition_defect(gauss(), g_gauss(), {0.25, 0.125, 0.0625}), ValidationError);

  // growing the band never increases the defect; it saturates at the required N
  double prev = 1e300;
  for (int N : {4, 8, 16, 24, 32, 42, 60}) {
    double d = composition_defect(gauss(), g_gauss(), 0.25, N, false);
    CHECK(d <= prev + 1e-15);
    prev = d;
  }
  CHECK(std::abs(prev - composition_defect(gauss(), g_gauss(), 0.25, 42)) < 1e-15);
}

TEST_CASE("odd semiclassical index") {
  SclLoopFamily zero;
  zero.rank = 2;
  zero.support_radius = 2;
  zero.theta_grid = 8;
  zero.a = [](double, double, double) { return CMatrix(CMatrix::Zero(2, 2)); };
  auto z = odd_scl_index(zero, 0.5, 8);
  for (auto& A : z.A) CHECK((A.matrix - CMatrix::Identity(A.size(), A.size())).norm() == 0);
  CHECK(std::abs(odd_scl_pairing(z)) < 1e-15);

  auto fam = su2_bump_family();
  auto r = odd_scl_index(fam, 0.5, 32);
  CHECK(r.max_residual < 1e-12);
  CHECK(r.max_iterations <= 50);
  double analytic = odd_scl_pairing(r), symbol = odd_symbol_pairing(fam, 48);
  CHECK(std::abs(std::abs(analytic) - 1) < 1e-5);
  CHECK(std::abs(analytic - symbol) < 1e-5);

  SclLoopFamily bad = zero;
  bad.rank = 1;
  bad.theta_grid = 8;
  bad.support_radius = 6;
  bad.a = [](double, double, double xi) { return sc(-std::exp(-xi * xi)); };  // Id + a vanishes at xi = 0
  CHECK_THROWS_AS(odd_scl_index(bad, 0.5, 4), ValidationError);
}

TEST_CASE("even semiclassical index") {
  auto fam = bott_scl_family();
  double P[3] = {0.3, -0.2, 1.0};
  auto e = even_scl_index(fam, 4, P);
  CHECK(e.idempotency_residual < 1e-12);
  CHECK(e.separation >= 0.1);

  SclSphereFamily triv = fam;
  triv.a = [](const double*, double, double) { return CMatrix(CMatrix::Zero(4, 4)); };
  auto t = even_scl_index(triv, 4, P);
  CHECK((t.E - t.E0).cwiseAbs().maxCoeff() < 1e-15);

  SclSphereFamily half = fam;
  half.a = [](const double*, double, double xi) {
    CMatrix m = CMatrix::Zero(4, 4);
    m(0, 0) = -0.5 * std::exp(-xi * xi);
    return m;
  };
  CHECK_THROWS_AS(even_scl_index(half, 4, P), ValidationError);

  auto a = even_scl_pairing(fam, 0.5, 1, 4);
  auto s = even_symbol_pairing(fam, 2, 4);
  CHECK(std::abs(std::abs(s.degree2) - 1) < 1e-4);
  CHECK(std::abs(a.degree0 - s.degree0) < 1e-10);
  CHECK(std::abs(a.degree2 - s.degree2) < 1e-2);
}

TEST_CASE("isotropic Bott operator has index 1") {
  // clutching degree of x + i xi on the unit circle
  cd sum = 0;
  const int n = 64;
  for (int i = 0; i < n; ++i) {
    double t = 2 * M_PI * i / n;
    cd b = std::polar(1.0, t), db = cd(0, 1) * b;
    sum += db / b;
  }
  int clutching = static_cast<int>(std::lround((sum / double(n)).imag()));
  CHECK(clutching == 1);

  std::vector<ThomCheck> detail;
  CHECK(thom_isotropic_check(64, {0.5, 0.25}, &detail) == clutching);
  CHECK(thom_isotropic_check(128, {0.5, 0.25}) == clutching);
  for (auto& d : detail) {
    CHECK(std::abs(d.ground_trace - 1) < 1e-10);
    CHECK(std::abs(d.ground_overlap - 1) < 1e-10);
    CHECK(d.idempotency_residual < 1e-12);
  }
  CHECK_THROWS_AS(thom_isotropic_check(16, {0.5, 0.125}), ValidationError);
}
