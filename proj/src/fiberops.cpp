#include "tk/fiberops.hpp"

#include "tk/bundlegeom.hpp"
#include "tk/cech.hpp"

#include <immintrin.h>

#include <cmath>
#include <random>
#include <stdexcept>

namespace tk {

// ---------------------------------------------------------------------------
// matrix product kernels

void matmul_scalar(const cd* A, const cd* B, cd* C, int n, int m, int p) {
  for (int j = 0; j < p; ++j) {
    cd* c = C + static_cast<std::size_t>(j) * n;
    for (int i = 0; i < n; ++i) c[i] = 0.0;
    for (int k = 0; k < m; ++k) {
      const cd b = B[k + static_cast<std::size_t>(j) * m];
      const cd* a = A + static_cast<std::size_t>(k) * n;
      for (int i = 0; i < n; ++i) c[i] += a[i] * b;
    }
  }
}

__attribute__((target("avx2,fma"))) void matmul_avx2(const cd* A, const cd* B, cd* C, int n, int m, int p) {
  const double* a = reinterpret_cast<const double*>(A);
  double* c = reinterpret_cast<double*>(C);
  const int pairs = n / 2;
  for (int j = 0; j < p; ++j) {
    double* cj = c + 2 * static_cast<std::size_t>(j) * n;
    for (int i = 0; i < 2 * n; ++i) cj[i] = 0.0;
    for (int k = 0; k < m; ++k) {
      const cd b = B[k + static_cast<std::size_t>(j) * m];
      const __m256d br = _mm256_set1_pd(b.real());
      const __m256d bi = _mm256_set1_pd(b.imag());
      const double* ak = a + 2 * static_cast<std::size_t>(k) * n;
      for (int t = 0; t < pairs; ++t) {
        __m256d av = _mm256_loadu_pd(ak + 4 * t);
        __m256d sw = _mm256_permute_pd(av, 0x5);  // (im, re) per complex
        // even lanes: ar*br - ai*bi, odd lanes: ai*br + ar*bi
        __m256d prod = _mm256_fmaddsub_pd(av, br, _mm256_mul_pd(sw, bi));
        __m256d cv = _mm256_loadu_pd(cj + 4 * t);
        _mm256_storeu_pd(cj + 4 * t, _mm256_add_pd(cv, prod));
      }
      if (n % 2) {
        cd* last = reinterpret_cast<cd*>(cj) + (n - 1);
        *last += A[static_cast<std::size_t>(k) * n + (n - 1)] * b;
      }
    }
  }
}

bool avx2_available() {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
}

namespace {
std::optional<MatmulKernel> forced_kernel;
}

MatmulKernel active_matmul_kernel() {
  if (forced_kernel) {
    if (*forced_kernel == MatmulKernel::Avx2 && !avx2_available()) return MatmulKernel::Scalar;
    return *forced_kernel;
  }
  return avx2_available() ? MatmulKernel::Avx2 : MatmulKernel::Scalar;
}

void force_matmul_kernel(std::optional<MatmulKernel> k) { forced_kernel = k; }

const char* kernel_name(MatmulKernel k) { return k == MatmulKernel::Avx2 ? "avx2" : "scalar"; }

CMatrix cmatmul(const CMatrix& A, const CMatrix& B) {
  if (A.cols() != B.rows()) throw std::invalid_argument("matrix product size mismatch");
  CMatrix C(A.rows(), B.cols());
  int n = static_cast<int>(A.rows()), m = static_cast<int>(A.cols()), p = static_cast<int>(B.cols());
  if (active_matmul_kernel() == MatmulKernel::Avx2)
    matmul_avx2(A.data(), B.data(), C.data(), n, m, p);
  else
    matmul_scalar(A.data(), B.data(), C.data(), n, m, p);
  return C;
}

// ---------------------------------------------------------------------------

TruncatedKernel TruncatedKernel::identity(int N) {
  TruncatedKernel k;
  k.N = N;
  k.matrix = CMatrix::Identity(2 * N + 1, 2 * N + 1);
  return k;
}

TruncatedKernel TruncatedKernel::zero(int N) {
  TruncatedKernel k;
  k.N = N;
  k.matrix = CMatrix::Zero(2 * N + 1, 2 * N + 1);
  return k;
}

void TruncatedKernel::validate() const {
  if (N < 0 || matrix.rows() != size() || matrix.cols() != size()) throw std::invalid_argument("kernel size");
  if (!matrix.allFinite()) throw std::invalid_argument("kernel has non-finite entries");
  if (grading && ((*grading)[0] < 0 || (*grading)[1] < 0 || (*grading)[0] + (*grading)[1] != size()))
    throw std::invalid_argument("grading blocks must sum to the kernel size");
}

TruncatedKernel compose(const TruncatedKernel& a, const TruncatedKernel& b) {
  if (a.N != b.N || a.rank != b.rank) throw StructuralError("kernels have different cutoffs or ranks");
  TruncatedKernel r;
  r.N = a.N;
  r.matrix = cmatmul(a.matrix, b.matrix);
  r.grading = a.grading;
  r.rank = a.rank;
  return r;
}

TruncatedKernel twisted_conjugate(const TruncatedKernel& a, int n, double* dropped) {
  if (std::abs(n) > a.N) throw std::invalid_argument("twist exceeds the band");
  TruncatedKernel r = TruncatedKernel::zero(a.N);
  r.grading = a.grading;
  r.rank = a.rank;
  int S = a.size();
  double lost = 0;
  for (int c = 0; c < S; ++c)
    for (int i = 0; i < S; ++i) {
      int i2 = i + n, c2 = c + n;
      if (i2 < 0 || i2 >= S || c2 < 0 || c2 >= S)
        lost += std::norm(a.matrix(i, c));
      else
        r.matrix(i2, c2) = a.matrix(i, c);
    }
  if (dropped) *dropped = lost;
  return r;
}

cd TrigPoly::operator()(double theta) const {
  cd s = 0;
  for (std::size_t m = 0; m < coeffs.size(); ++m) s += coeffs[m] * std::polar(1.0, (lo + static_cast<int>(m)) * theta);
  return s;
}

TruncatedKernel multiplication(int N, const TrigPoly& g, double* dropped) {
  TruncatedKernel r = TruncatedKernel::zero(N);
  double lost = 0;
  for (int k = -N; k <= N; ++k)
    for (std::size_t m = 0; m < g.coeffs.size(); ++m) {
      int row = k + g.lo + static_cast<int>(m);
      if (row < -N || row > N)
        lost += std::norm(g.coeffs[m]);
      else
        r.at(row, k) += g.coeffs[m];
    }
  if (dropped) *dropped = lost;
  return r;
}

TruncatedKernel translation(int N, double phi) {
  TruncatedKernel r = TruncatedKernel::zero(N);
  for (int k = -N; k <= N; ++k) r.at(k, k) = std::polar(1.0, k * phi);
  return r;
}

TruncatedKernel mode_shift(int N, int n) {
  TruncatedKernel r = TruncatedKernel::zero(N);
  for (int k = -N; k <= N; ++k)
    if (k + n >= -N && k + n <= N) r.at(k + n, k) = 1.0;
  return r;
}

TruncatedKernel heisenberg_element(int N, double phi, int n, cd z) {
  TruncatedKernel r = compose(mode_shift(N, n), translation(N, phi));
  r.matrix *= z;
  return r;
}

TruncatedKernel heisenberg_commutator(int N, int n, double phi) {
  auto M = mode_shift(N, n), Minv = mode_shift(N, -n);
  return compose(compose(compose(M, translation(N, phi)), Minv), translation(N, -phi));
}

// ---------------------------------------------------------------------------

Parametrix parametrix(const CMatrix& P, double rel_tol) {
  Parametrix r;
  Eigen::JacobiSVD<CMatrix> svd(P, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double smax = s.size() ? s[0] : 0.0;
  CMatrix Sinv = CMatrix::Zero(P.cols(), P.rows());
  double smin = smax;
  for (int i = 0; i < s.size(); ++i) {
    if (s[i] > rel_tol * smax && s[i] > 0) {
      Sinv(i, i) = 1.0 / s[i];
      ++r.rank;
      smin = s[i];
    }
  }
  r.Q = cmatmul(cmatmul(svd.matrixV(), Sinv), svd.matrixU().adjoint());
  r.S0 = CMatrix::Identity(P.cols(), P.cols()) - cmatmul(r.Q, P);
  r.S1 = CMatrix::Identity(P.rows(), P.rows()) - cmatmul(P, r.Q);
  r.condition = r.rank ? smax / smin : 0.0;
  r.ill_conditioned = r.condition > 1e12;
  return r;
}

IndexData index_idempotent(const CMatrix& P, const CMatrix& Q, const CMatrix& S0, const CMatrix& S1) {
  int n0 = static_cast<int>(P.cols()), n1 = static_cast<int>(P.rows());
  if (Q.rows() != n0 || Q.cols() != n1 || S0.rows() != n0 || S1.rows() != n1)
    throw StructuralError("parametrix blocks have inconsistent sizes");
  IndexData d;
  d.P = P;
  d.Q = Q;
  d.S0 = S0;
  d.S1 = S1;
  CMatrix S0sq = cmatmul(S0, S0), S1sq = cmatmul(S1, S1);
  d.E1 = CMatrix::Zero(n0 + n1, n0 + n1);
  d.E1.topLeftCorner(n0, n0) = CMatrix::Identity(n0, n0) - S0sq;
  d.E1.topRightCorner(n0, n1) = cmatmul(Q, S1 + S1sq);
  d.E1.bottomLeftCorner(n1, n0) = cmatmul(S1, P);
  d.E1.bottomRightCorner(n1, n1) = S1sq;
  d.E0 = CMatrix::Zero(n0 + n1, n0 + n1);
  d.E0.topLeftCorner(n0, n0).setIdentity();
  d.idempotency_residual = (cmatmul(d.E1, d.E1) - d.E1).cwiseAbs().maxCoeff();
  if (d.idempotency_residual > 1e-9) throw ValidationError("E1 is not idempotent: inconsistent parametrix data");
  d.trace = (d.E1 - d.E0).trace();
  auto rank_of = [](const CMatrix& S) {
    Eigen::JacobiSVD<CMatrix> svd(S);
    int r = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > 1e-8) ++r;
    return r;
  };
  d.rank_S0 = rank_of(S0);
  d.rank_S1 = rank_of(S1);
  return d;
}

IndexData index_data(const CMatrix& P) {
  auto p = parametrix(P);
  return index_idempotent(P, p.Q, p.S0, p.S1);
}

CMatrix toeplitz(const TrigPoly& g, int N, int shift) {
  if (N + shift < 0) throw std::invalid_argument("codomain band is empty");
  CMatrix T = CMatrix::Zero(N + shift + 1, N + 1);
  for (int k = 0; k <= N; ++k)
    for (std::size_t m = 0; m < g.coeffs.size(); ++m) {
      int row = k + g.lo + static_cast<int>(m);
      if (row >= 0 && row <= N + shift) T(row, k) += g.coeffs[m];
    }
  return T;
}

TrigPoly winding_symbol(int k, double c) {
  if (std::abs(c) >= 1) throw std::invalid_argument("winding symbol needs |c| < 1");
  TrigPoly g;
  g.lo = k - 1;
  double s = 1.0 / (1.0 + std::abs(c));
  g.coeffs = {0.5 * c * s, s, 0.5 * c * s};
  return g;
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kArcs = 3;
constexpr double kArcHalfWidth = 0.25;

// Toeplitz-type fiber operator: Pi+ M_a Pi+ + Pi- on the band.
TruncatedKernel toeplitz_type(int N, const TrigPoly& a) {
  TruncatedKernel r = TruncatedKernel::zero(N);
  for (int k = -N; k < 0; ++k) r.at(k, k) = 1.0;
  for (int k = 0; k <= N; ++k)
    for (std::size_t m = 0; m < a.coeffs.size(); ++m) {
      int row = k + a.lo + static_cast<int>(m);
      if (row >= 0 && row <= N) r.at(row, k) += a.coeffs[m];
    }
  return r;
}

}  // namespace

OperatorFamily build_projective_family(const FamilyScenario& s) {
  if (s.N < 4 || s.samples < 1) throw std::invalid_argument("family needs N >= 4 and samples >= 1");
  if (std::abs(s.u_winding) * 2 > s.N) throw ValidationError("u winding too large for the band");
  OperatorFamily f;
  f.scenario = s;
  std::mt19937 rng(s.seed);
  std::uniform_real_distribution<double> U(0, 1), V(-1, 1);
  for (int i = 0; i < s.samples; ++i) {
    FamilySample smp;
    smp.x = U(rng);
    double P[3];
    int ax = static_cast<int>(3 * U(rng)) % 3;
    for (int a = 0; a < 3; ++a) P[a] = V(rng);
    P[ax] = U(rng) < 0.5 ? -1.0 : 1.0;
    smp.y = sphere_point(P);
    double c = 0.3 * smp.y[2] * std::cos(2 * M_PI * smp.x);
    TruncatedKernel base = toeplitz_type(s.N, winding_symbol(s.symbol_winding, c));
    for (int j = 0; j < kArcs; ++j) {
      double centre = static_cast<double>(j) / kArcs;
      double dx = smp.x - centre;
      dx -= std::round(dx);
      if (std::abs(dx) >= kArcHalfWidth) continue;
      double unwrapped = centre + dx;  // lift of x on the arc
      int br = static_cast<int>(std::lround(s.u_winding * (unwrapped - smp.x)));
      double lost = 0;
      smp.patches.push_back(j);
      smp.branch.push_back(br);
      smp.kernels.push_back(twisted_conjugate(base, br, &lost));
      f.truncation_mass = std::max(f.truncation_mass, lost);
    }
    for (int p = 0; p < kSpherePatches; ++p) {
      if (!point_in_patch(p, P)) continue;
      smp.sphere_patches.push_back(p);
      smp.phase.push_back(smp.sphere_patches.size() == 1
                              ? 0.0
                              : s.bundle_degree * hopf_transition(smp.sphere_patches.front(), p, P));
    }
    // overlap compatibility: K_k = e^{i n theta} K_j e^{-i n theta'} with n = n_k - n_j,
    // compared where neither side was truncated
    for (std::size_t a = 0; a < smp.patches.size(); ++a)
      for (std::size_t b = 0; b < smp.patches.size(); ++b) {
        int n = smp.branch[b] - smp.branch[a];
        if (std::abs(n) > s.N) throw ValidationError("inconsistent cover data");
        auto moved = twisted_conjugate(smp.kernels[a], n);
        int S = base.size();
        int lo = std::max(0, n), hi = std::min(S, S + n);
        for (int cc = lo; cc < hi; ++cc)
          for (int rr = lo; rr < hi; ++rr)
            f.compatibility_residual = std::max(
                f.compatibility_residual,
                std::abs(moved.matrix(rr, cc) - smp.kernels[b].matrix(rr, cc)));
      }
    f.samples.push_back(std::move(smp));
  }
  return f;
}

std::vector<cd> symbol_at(const TruncatedKernel& k, int column_mode, const std::vector<double>& theta) {
  std::vector<cd> out(theta.size(), 0.0);
  for (int row = -k.N; row <= k.N; ++row) {
    cd a = k.at(row, column_mode);
    if (a == 0.0) continue;
    int m = row - column_mode;
    for (std::size_t t = 0; t < theta.size(); ++t) out[t] += a * std::polar(1.0, m * theta[t]);
  }
  return out;
}

SymbolTable symbol_of(const OperatorFamily& f, int grid) {
  SymbolTable t;
  for (int i = 0; i < grid; ++i) t.theta.push_back(2 * M_PI * i / grid);
  int edge = f.scenario.N / 2;
  for (const auto& smp : f.samples) {
    std::vector<cd> plus, minus;
    for (std::size_t p = 0; p < smp.kernels.size(); ++p) {
      auto sp = symbol_at(smp.kernels[p], edge, t.theta), sm = symbol_at(smp.kernels[p], -edge, t.theta);
      if (p == 0) {
        plus = sp;
        minus = sm;
        continue;
      }
      for (std::size_t q = 0; q < sp.size(); ++q)
        t.overlap_residual =
            std::max({t.overlap_residual, std::abs(sp[q] - plus[q]), std::abs(sm[q] - minus[q])});
    }
    t.plus.push_back(plus);
    t.minus.push_back(minus);
  }
  return t;
}

}  // namespace tk
