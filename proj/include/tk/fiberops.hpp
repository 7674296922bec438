#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace tk {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

// Complex matrix product C = A B on column-major storage (A n x m, B m x p).
// The scalar kernel is the reference; the AVX2/FMA kernel is chosen at run
// time when the CPU supports it.
enum class MatmulKernel { Scalar, Avx2 };
void matmul_scalar(const cd* A, const cd* B, cd* C, int n, int m, int p);
void matmul_avx2(const cd* A, const cd* B, cd* C, int n, int m, int p);
bool avx2_available();
MatmulKernel active_matmul_kernel();
// Overrides the dispatch (nullopt restores automatic selection).
void force_matmul_kernel(std::optional<MatmulKernel> k);
const char* kernel_name(MatmulKernel k);
CMatrix cmatmul(const CMatrix& A, const CMatrix& B);

// Smoothing kernel on the circle fiber in the orthonormal Fourier basis,
// modes -N..N; row/column i is mode i - N. With rank > 1 the index is
// (mode + N) * rank + component.
struct TruncatedKernel {
  int N = 0;
  CMatrix matrix;
  std::optional<std::array<int, 2>> grading;  // (dim E+, dim E-) per side
  int rank = 1;

  int size() const { return (2 * N + 1) * rank; }
  static TruncatedKernel identity(int N);
  static TruncatedKernel zero(int N);
  cd& at(int row_mode, int col_mode) { return matrix(row_mode + N, col_mode + N); }
  cd at(int row_mode, int col_mode) const { return matrix(row_mode + N, col_mode + N); }
  void validate() const;
};

TruncatedKernel compose(const TruncatedKernel& a, const TruncatedKernel& b);

// e^{i n theta} a e^{-i n theta'}: entries shift by n along both indices.
// `dropped` receives the squared mass pushed out of the band.
TruncatedKernel twisted_conjugate(const TruncatedKernel& a, int n, double* dropped = nullptr);

// Multiplication by a trigonometric polynomial g = sum_m coeffs[m] e^{i m theta}.
struct TrigPoly {
  int lo = 0;  // mode of coeffs[0]
  std::vector<cd> coeffs;
  cd operator()(double theta) const;  // theta in radians
  int hi() const { return lo + static_cast<int>(coeffs.size()) - 1; }
};
TruncatedKernel multiplication(int N, const TrigPoly& g, double* dropped = nullptr);

// Heisenberg representation on L^2(S^1): translation by phi is diagonal,
// multiplication by e^{i n theta} is a mode shift. h(phi, n, z) = z M(n) T(phi).
TruncatedKernel translation(int N, double phi);
TruncatedKernel mode_shift(int N, int n);
TruncatedKernel heisenberg_element(int N, double phi, int n, cd z);
TruncatedKernel heisenberg_commutator(int N, int n, double phi);  // M T M^{-1} T^{-1} on the band

struct Parametrix {
  CMatrix Q, S0, S1;
  int rank = 0;
  double condition = 0;  // of the nonzero part
  bool ill_conditioned = false;
};
Parametrix parametrix(const CMatrix& P, double rel_tol = 1e-10);

struct IndexData {
  CMatrix P, Q, S0, S1, E0, E1;
  double idempotency_residual = 0;
  cd trace;  // trace(E1 - E0) = rank S1 - rank S0
  int rank_S0 = 0, rank_S1 = 0;
  int index() const { return rank_S0 - rank_S1; }
};
// E1 = [[1 - S0^2, Q(S1 + S1^2)], [S1 P, S1^2]], E0 = [[1, 0], [0, 0]].
IndexData index_idempotent(const CMatrix& P, const CMatrix& Q, const CMatrix& S0, const CMatrix& S1);
IndexData index_data(const CMatrix& P);

// Toeplitz operator of g on the Hardy band: domain modes 0..N, codomain
// modes 0..N+shift. With shift = winding the compression is exact for
// symbols supported in modes 0..winding.
CMatrix toeplitz(const TrigPoly& g, int N, int shift);
// A winding-k symbol e^{ik theta} (1 + c cos theta)/(1 + c), |c| < 1.
TrigPoly winding_symbol(int k, double c = 0.0);

// Projective family over sampled points of S^1 x S^2.
struct FamilyScenario {
  int N = 32;
  int symbol_winding = 1;
  int u_winding = 0;
  int bundle_degree = 0;
  int samples = 64;
  unsigned seed = 1;
};

struct FamilySample {
  double x = 0;
  std::array<double, 3> y{0, 0, 1};
  std::vector<int> patches;               // circle arcs containing x
  std::vector<int> branch;                // integer lift of u on each patch
  std::vector<TruncatedKernel> kernels;   // per patch
  std::vector<int> sphere_patches;
  std::vector<double> phase;  // c_jk phase (turns) of each sphere patch relative to the first
};

struct OperatorFamily {
  FamilyScenario scenario;
  std::vector<FamilySample> samples;
  double compatibility_residual = 0;  // max over overlaps, exact by construction
  double truncation_mass = 0;
};
OperatorFamily build_projective_family(const FamilyScenario& s);

struct SymbolTable {
  std::vector<double> theta;
  std::vector<std::vector<cd>> plus, minus;  // per sample, band-edge limits on the theta grid
  double overlap_residual = 0;
};
// Band-edge symbols read from the columns at modes +-N/2.
SymbolTable symbol_of(const OperatorFamily& f, int grid = 16);
std::vector<cd> symbol_at(const TruncatedKernel& k, int column_mode, const std::vector<double>& theta);

}  // namespace tk
