#pragma once

#include "tk/cherncalc.hpp"
#include "tk/fiberops.hpp"

#include <functional>
#include <string>
#include <vector>

namespace tk {

// Symbol a(theta, xi) on the circle fiber cotangent bundle, theta in [0, 1),
// rank x rank matrix values. theta_grid points resolve the theta dependence;
// |a| must be below kSclEnvelope for |xi| >= support_radius.
constexpr double kSclEnvelope = 1e-12;
struct SclSymbol {
  int rank = 1;
  std::function<CMatrix(double theta, double xi)> a;
  double support_radius = 6;
  int theta_grid = 32;

  SclSymbol() = default;
  SclSymbol(int rank, std::function<CMatrix(double, double)> a, double support_radius, int theta_grid = 32);
  CMatrix operator()(double theta, double xi) const { return a(theta, xi); }
  double theta_at(int g) const { return double(g) / theta_grid; }
};

// Smallest N with eps (N - theta_grid / 2) >= support_radius.
int required_modes(const SclSymbol& a, double eps);

// Left quantization: Op(a) e_k = sum_j a^_j(eps k) e_{k+j}, a^_j the discrete
// Fourier coefficients on the theta grid (|j| < theta_grid / 2 plus the
// Nyquist mode). Throws ValidationError naming the required N when the band
// does not cover the xi-support.
TruncatedKernel quantize(const SclSymbol& a, double eps, int N);
TruncatedKernel quantize_unchecked(const SclSymbol& a, double eps, int N);

// sigma(K)(theta_g, eps k) = sum_j K(k + j, k) e^{2 pi i j theta_g}, for the
// columns |k| <= kmax; entry [k + kmax][g] is a rank x rank block.
using SymbolSamples = std::vector<std::vector<CMatrix>>;
SymbolSamples scl_symbol(const TruncatedKernel& K, int theta_grid, int kmax);

struct SclFamily {
  std::vector<double> epsilons;
  std::vector<TruncatedKernel> operators;
  SclSymbol source_symbol;
};
// N = required_modes at each eps.
SclFamily quantize_family(const SclSymbol& a, const std::vector<double>& epsilons);

// sup over the theta grid and |eps k| <= max support radius of
// |sigma(Op(a) Op(b)) - a b|. The product is formed only on the entries the
// symbol reads.
double composition_defect(const SclSymbol& a, const SclSymbol& b, double eps, int N, bool check_band = true);

struct DefectReport {
  std::vector<double> eps, defect;
  std::vector<int> N;
  double slope = 0;  // least-squares log-log slope of defect against eps
};
std::vector<double> default_eps_grid();  // 1/8 .. 1/128
// N <= 0 uses required_modes at each eps.
DefectReport scl_composition_defect(const SclSymbol& a, const SclSymbol& b,
                                    const std::vector<double>& eps_grid = default_eps_grid(), int N = 0);
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Catalog of symbol pairs with an O(eps) composition defect. In left
// quantization Op(a) Op(b) = Op(a b) exactly when a is theta-only or b is
// xi-only, so each pair has xi-dependence on the left and theta-dependence on
// the right.
struct SclPair {
  std::string name;
  SclSymbol a, b;
};
std::vector<SclPair> scl_catalog_pairs();

// Family of decaying symbols a(x; theta, xi) over the base circle x in [0, 1).
struct SclLoopFamily {
  SclSymbol at(double x) const;
  std::function<CMatrix(double x, double theta, double xi)> a;
  int rank = 1;
  double support_radius = 6;
  int theta_grid = 32;
};
// SU(2)-valued Id + a of degree 1 on S^1_x x S^1 x R, equal to Id outside a ball.
SclLoopFamily su2_bump_family(double xi_scale = 8);

struct OddSclIndex {
  double eps = 0.5;
  int N = 0;
  std::vector<double> x;
  std::vector<TruncatedKernel> A, Ainv, dA;  // polished invertible family and x-derivative
  int max_iterations = 0;                   // Newton steps used
  double max_residual = 0;                  // |1 - A Ainv|
  double min_singular = 0;
};
// Op(1 + a(x)) at eps with a Newton-Schulz (accelerated Neumann) polish of
// Op(1 + a)^-1 seeded by Op((1 + a)^-1) on x_samples periodic points.
OddSclIndex odd_scl_index(const SclLoopFamily& fam, double eps = 0.5, int x_samples = 64, int N = 0);
// (1/2 pi i) int tr(A^-1 dA) over the base circle through odd_chern_point.
double odd_scl_pairing(const OddSclIndex& r);
// Symbol-side pairings integrate over (theta, xi) in that orientation and carry
// the factor (-1)^n, n = 1 the fibre dimension.
constexpr int kSclSign = -1;
// kSclSign * int over (x, theta, xi) of the degree-3 character of 1 + a.
double odd_symbol_pairing(const SclLoopFamily& fam, int points = 48);

// Idempotent-valued symbol p = pinf + a(y; theta, xi) over S^2 (y on the cube sphere).
struct SclSphereFamily {
  std::function<CMatrix(const double* P, double theta, double xi)> a;
  CMatrix pinf;
  double support_radius = 4;
  int theta_grid = 8;
  SclSymbol at(const double* P) const;
};
// e_y (x) q + (1 - e_y) (x) pinf, pinf = diag(1, 0), q = v v^* the degree-1
// bump v = (cos phi(r), (z / r) sin phi(r)), phi from pi/2 to 0, in z = ((theta - 1/2) / 0.45, xi / xi_scale).
SclSphereFamily bott_scl_family(double xi_scale = 4);

struct EvenSclPoint {
  CMatrix E, E0;
  std::vector<CMatrix> dE;  // along the two tangent directions of the patch
  double idempotency_residual = 0;
  double separation = 0;    // min |Re(lambda) - 1/2| over the spectrum of Op(p)
};
// Riesz projection (1/2 pi i) oint (z - P)^-1 dz around the eigenvalues with
// Re > 1/2, computed as (1 + sign(2P - 1)) / 2 by Newton's iteration, with
// the derivative along the two sphere directions carried through it.
EvenSclPoint even_scl_index(const SclSphereFamily& fam, int patch, const double* P, double eps = 0.5, int N = 0);
// degree 0 and degree 2 pairings of the even character of the polished family.
SpherePairing even_scl_pairing(const SclSphereFamily& fam, double eps = 0.5, int n = 2, int q = 4);
// kSclSign * int_{S^2} ch1(e_y) * int ch1(q) computed from the symbol.
SpherePairing even_symbol_pairing(const SclSphereFamily& fam, int n = 2, int q = 4, int points = 64);

// Isotropic Bott check on R^2 = T*R: Op_eps(x + i xi) = x + eps d/dx in the
// unit-scale Hermite basis, truncated to domain 0..N and codomain 0..N-1.
struct ThomCheck {
  double eps = 0;
  int N = 0;
  int index = 0;               // dim ker - dim coker
  cd trace;                    // tr(E1 - E0) = -index
  double ground_trace = 0;     // trace of the kernel projector
  double ground_mass = 0;      // mass of the squeezed ground state in the band
  double ground_overlap = 0;   // |<kernel, squeezed ground state>|^2
  double idempotency_residual = 0;
};
ThomCheck thom_point(int N, double eps);
// Returns the common index over eps_grid; throws if any index differs.
int thom_isotropic_check(int N, const std::vector<double>& eps_grid = {0.5, 0.25}, std::vector<ThomCheck>* detail = nullptr);

}  // namespace tk
