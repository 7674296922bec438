#include "doctest.h"
#include "tk/cech.hpp"
#include "tk/fiberops.hpp"

#include <cmath>
#include <random>

using namespace tk;

namespace {

CMatrix random_matrix(int r, int c, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  CMatrix m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = cd(g(rng), g(rng));
  return m;
}

TruncatedKernel random_kernel(int N, unsigned seed) {
  TruncatedKernel k;
  k.N = N;
  k.matrix = random_matrix(2 * N + 1, 2 * N + 1, seed);
  return k;
}

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("scalar and AVX2 matrix products agree") {
  for (auto [n, m, p] : {std::array<int, 3>{1, 1, 1}, {7, 5, 3}, {16, 16, 16}, {33, 17, 9}}) {
    auto A = random_matrix(n, m, 1), B = random_matrix(m, p, 2);
    CMatrix C1(n, p), C2(n, p);
    matmul_scalar(A.data(), B.data(), C1.data(), n, m, p);
    CMatrix ref = A * B;
    CHECK(max_abs(C1 - ref) <= 1e-12);
    if (avx2_available()) {
      matmul_avx2(A.data(), B.data(), C2.data(), n, m, p);
      CHECK(max_abs(C1 - C2) <= 1e-12);
    }
  }
  force_matmul_kernel(MatmulKernel::Scalar);
  CHECK(active_matmul_kernel() == MatmulKernel::Scalar);
  auto A = random_matrix(9, 9, 3);
  CMatrix s = cmatmul(A, A);
  force_matmul_kernel(MatmulKernel::Avx2);
  CMatrix v = cmatmul(A, A);
  force_matmul_kernel(std::nullopt);
  CHECK(max_abs(s - v) <= 1e-12);
  CHECK_THROWS(cmatmul(random_matrix(2, 3, 1), random_matrix(2, 3, 1)));
}

TEST_CASE("composition is associative with the identity as unit") {
  auto a = random_kernel(6, 1), b = random_kernel(6, 2), c = random_kernel(6, 3);
  auto I = TruncatedKernel::identity(6);
  CHECK(max_abs(compose(I, a).matrix - a.matrix) <= 1e-13);
  CHECK(max_abs(compose(a, I).matrix - a.matrix) <= 1e-13);
  auto l = compose(compose(a, b), c), r = compose(a, compose(b, c));
  CHECK(max_abs(l.matrix - r.matrix) <= 1e-12);
  CHECK_THROWS_AS(compose(a, random_kernel(5, 1)), StructuralError);
}

TEST_CASE("rank one kernels compose through the inner product") {
  int N = 5;
  auto u = random_matrix(2 * N + 1, 1, 4), v = random_matrix(2 * N + 1, 1, 5), w = random_matrix(2 * N + 1, 1, 6);
  TruncatedKernel a{N, u * v.adjoint(), {}}, b{N, v * w.adjoint(), {}};
  cd vv = (v.adjoint() * v)(0, 0);
  CHECK(max_abs(compose(a, b).matrix - vv * u * w.adjoint()) <= 1e-12);
}

TEST_CASE("twisted conjugation is additive and multiplicative inside the band") {
  int N = 10;
  auto a = random_kernel(N, 7);
  double lost = 0;
  auto s = twisted_conjugate(twisted_conjugate(a, 2), 3);
  auto t = twisted_conjugate(a, 5, &lost);
  CHECK(max_abs(s.matrix - t.matrix) <= 0.0);
  CHECK(lost > 0);
  CHECK(max_abs(twisted_conjugate(a, 0).matrix - a.matrix) == 0.0);
  // conj(ab) = conj(a) conj(b) for band-limited factors
  TrigPoly g{-1, {0.5, 1.0, cd(0, 0.25)}};
  auto ma = multiplication(N, g), mb = multiplication(N, TrigPoly{0, {1.0, 0.5}});
  auto lhs = twisted_conjugate(compose(ma, mb), 1);
  auto rhs = compose(twisted_conjugate(ma, 1), twisted_conjugate(mb, 1));
  // agreement away from the band edges
  CHECK(max_abs((lhs.matrix - rhs.matrix).block(4, 4, 2 * N - 7, 2 * N - 7)) <= 1e-13);
  CHECK_THROWS(twisted_conjugate(a, N + 1));
}

TEST_CASE("Heisenberg commutator is a central scalar on interior modes") {
  int N = 12;
  auto c = heisenberg_commutator(N, 1, M_PI);
  for (int k = -N + 2; k <= N - 2; ++k) CHECK(std::abs(c.at(k, k) + 1.0) <= 1e-13);
  // h(phi1, n1) h(phi2, n2) = e^{i n2 phi1} h(phi1 + phi2, n1 + n2)
  double p1 = 0.7, p2 = -1.3;
  auto h = compose(heisenberg_element(N, p1, 1, 1.0), heisenberg_element(N, p2, 2, 1.0));
  auto g = heisenberg_element(N, p1 + p2, 3, std::polar(1.0, 2 * p1));
  for (int k = -N; k <= N - 3; ++k)
    for (int j = -N; j <= N; ++j) CHECK(std::abs(h.at(j, k) - g.at(j, k)) <= 1e-13);
}

TEST_CASE("parametrix of invertible, shift and singular diagonal operators") {
  auto P = random_matrix(8, 8, 11);
  auto p = parametrix(P);
  CHECK(p.rank == 8);
  CHECK(max_abs(p.S0) <= 1e-10);
  CHECK(max_abs(p.S1) <= 1e-10);
  CHECK_FALSE(p.ill_conditioned);

  CMatrix D = CMatrix::Identity(5, 5);
  D(2, 2) = 0;
  auto q = parametrix(D);
  CHECK(q.rank == 4);
  CHECK(std::abs(q.S0(2, 2) - 1.0) <= 1e-12);
  CHECK(std::abs(q.S1(2, 2) - 1.0) <= 1e-12);
  auto d = index_data(D);
  CHECK(d.index() == 0);
  CHECK(std::abs(d.trace) <= 1e-12);

  CMatrix S = CMatrix::Zero(6, 5);
  for (int i = 0; i < 5; ++i) S(i + 1, i) = 1;
  auto e = index_data(S);
  CHECK(e.rank_S0 == 0);
  CHECK(e.rank_S1 == 1);
  CHECK(e.index() == -1);
  CHECK(std::abs(e.trace - 1.0) <= 1e-12);

  CMatrix T = CMatrix::Identity(4, 4);
  T(3, 3) = 1e-14;
  CHECK(parametrix(T, 1e-16).ill_conditioned);
}

TEST_CASE("index idempotent is idempotent with integral trace for random operators") {
  for (unsigned seed = 1; seed <= 6; ++seed) {
    int r = 4 + seed % 3, c = 3 + seed % 4;
    CMatrix P = random_matrix(r, c, seed);
    if (seed % 2) P.col(0) = P.col(1);  // rank deficient
    auto d = index_data(P);
    CHECK(d.idempotency_residual <= 1e-10);
    CHECK(std::abs(d.trace.imag()) <= 1e-10);
    CHECK(std::abs(d.trace.real() - std::round(d.trace.real())) <= 1e-10);
    CHECK(std::lround(d.trace.real()) == -d.index());
    CHECK(d.index() == c - r);
  }
  CMatrix P = CMatrix::Identity(3, 3);
  CHECK_THROWS_AS(index_idempotent(P, P, 0.5 * P, CMatrix::Zero(3, 3)), ValidationError);
}

TEST_CASE("Toeplitz operators of winding symbols have trace equal to the winding") {
  for (int k : {0, 1, 2, 3}) {
    auto d = index_data(toeplitz(winding_symbol(k), 24, k));
    CHECK(std::abs(d.trace - cd(k)) <= 1e-9);
    CHECK(d.index() == -k);
  }
  // an analytic symbol with its zero inside the disc winds once
  TrigPoly g{0, {0.3, 1.0}};
  CHECK(std::abs(index_data(toeplitz(g, 24, 1)).trace - 1.0) <= 1e-9);
  auto w = winding_symbol(2, 0.0);
  CHECK(std::abs(w(0.3) - std::polar(1.0, 0.6)) <= 1e-14);
  CHECK_THROWS(winding_symbol(1, 1.0));
}

TEST_CASE("projective family is compatible on overlaps and has agreeing symbols") {
  FamilyScenario s;
  s.N = 16;
  s.u_winding = 2;
  s.bundle_degree = 1;
  s.samples = 24;
  auto f = build_projective_family(s);
  CHECK(f.samples.size() == 24);
  CHECK(f.compatibility_residual == 0.0);
  bool overlap = false;
  for (const auto& smp : f.samples) {
    CHECK(!smp.patches.empty());
    CHECK(!smp.sphere_patches.empty());
    overlap |= smp.patches.size() > 1;
  }
  CHECK(overlap);
  auto t = symbol_of(f);
  CHECK(t.overlap_residual <= 1e-13);
  // minus symbol is 1, plus symbol winds once
  for (std::size_t i = 0; i < t.plus.size(); ++i) {
    for (auto z : t.minus[i]) CHECK(std::abs(z - 1.0) <= 1e-12);
    double turn = 0;
    for (std::size_t q = 0; q < t.theta.size(); ++q)
      turn += std::arg(t.plus[i][(q + 1) % t.theta.size()] / t.plus[i][q]);
    CHECK(std::abs(turn / (2 * M_PI) - 1.0) <= 1e-9);
  }
}
