#pragma once

#include "tk/fiberops.hpp"
#include "tk/series.hpp"
#include "tk/twistedderham.hpp"

#include <functional>
#include <map>
#include <string>

namespace tk {

// Operator-valued differential form at a point with `dim` local directions;
// c[mask] multiplies the wedge of the directions in mask (increasing order).
// An empty matrix is zero.
struct OpForm {
  int dim = 0, n = 0;
  std::vector<CMatrix> c;

  OpForm() = default;
  OpForm(int dim, int n);
  static OpForm constant(int dim, const CMatrix& m);
  bool has(int mask) const { return c[mask].size() > 0; }
  CMatrix& at(int mask);
  OpForm& operator+=(const OpForm& o);
  OpForm operator+(const OpForm& o) const { auto r = *this; r += o; return r; }
  OpForm operator*(cd s) const;
  OpForm left(const CMatrix& m) const;   // m w
  OpForm right(const CMatrix& m) const;  // w m
  std::vector<cd> trace() const;
};
OpForm wedge(const OpForm& a, const OpForm& b);
// exp truncated at the form dimension; `w` must have even degrees only
OpForm exp_form(const OpForm& w);
// scalar form components indexed by mask
using ScalarForm = std::vector<cd>;
int mask_degree(int mask);

// Connection data at a point in local directions (base directions first).
// fiber >= 0 marks the theta1 direction of L~; gamma = dtheta1 + A there.
struct LocalConnection {
  int dim = 0;
  std::vector<double> A;      // base connection, per direction
  Eigen::MatrixXd beta;       // curvature beta_bar(i, j)
  double f = 0;               // local lift of the twist function
  std::vector<double> df;
  int fiber = -1;

  static LocalConnection flat(int dim);
};

// Band of Fourier modes lo..hi with C^rank coefficients; index (k - lo) * rank + c.
struct ModeBand {
  int lo = 0, hi = 0, rank = 1;
  int modes() const { return hi - lo + 1; }
  int size() const { return modes() * rank; }
  CMatrix D() const;  // mode number operator
  int index(int mode, int c = 0) const { return (mode - lo) * rank + c; }
};

// Covariant derivative of an operator: dX_i - 2 pi i A_i [D, X].
std::vector<CMatrix> covariant(const CMatrix& X, const std::vector<CMatrix>& dX, const LocalConnection& c,
                               const CMatrix& D);

// Odd character (1/2 pi i) int_0^1 tr(theta exp((1-t) R + t A^-1 R A + t(1-t) theta^2 / 2 pi i)) dt
// with theta = A^-1 nabla A and R = beta (D - f) - df ^ gamma. The integrand
// is a polynomial in t of degree <= dim, so any t_nodes > dim / 2 is exact.
ScalarForm odd_chern_point(const CMatrix& A, const std::vector<CMatrix>& dA, const LocalConnection& c,
                           const CMatrix& D, int t_nodes = 12);
// Even character tr(e exp(e R e - e nabla e nabla e e / 2 pi i)) - tr(e0 exp(e0 R e0)).
ScalarForm even_chern_point(const CMatrix& e, const std::vector<CMatrix>& de, const CMatrix& e0,
                            const LocalConnection& c, const CMatrix& D);

struct ChernForm {
  DiscreteForm form;
  std::string parity;
  double closedness_residual = 0;
  double subcomplex_residual = 0;
  double factorization_residual = 0;
  double imaginary_part = 0;  // sup of the discarded imaginary part
};

// ---------------------------------------------------------------------------
// Twisted geometry of S^1 x S^2: base parameters (x, P[3]) with P on the cube.

struct TwistedGeometry {
  int degree = 1;
  TwistFunction f;  // layout: x at 0, cube coordinates at 1

  static TwistedGeometry make(int degree, int winding, double eps);
  // Local directions: x, the two tangent cube axes of `patch`, then theta1 if with_fiber.
  LocalConnection at(int patch, const double* p, bool with_fiber) const;
  static std::array<int, 2> tangent_axes(int patch);
};

// Unitary smoothing family U = exp(i H(x, y)) on a band of modes; H decays
// like exp(-k^2/4) and varies with the base point.
struct UnitaryFamily {
  int N = 10;
  double strength = 0.8;
  int deck = 0;  // conjugate by the n-fold mode shift, with f -> f + n

  CMatrix at(const double* p) const;
};

struct OddChernSettings {
  int M = 4, n = 2, fiber_points = 8;  // chart mesh: x-interval x face patch x theta1 circle
  int patch = 0;
  int quadrature = 1;
  int t_nodes = 12;
  double x0 = 0.1, x1 = 0.9;
};

struct OddChernResult {
  ChernForm ch;          // on the L~ chart
  DiscreteForm v;        // descended form on the base chart
  double h = 0;          // mesh size of the face patch
  double imaginary_part = 0;
};
OddChernResult odd_chern(const UnitaryFamily& A, const TwistedGeometry& g, const OddChernSettings& s);

// Pointwise odd character at (x, P, theta) and the largest deviation under f -> f + 1.
ScalarForm odd_chern_at(const UnitaryFamily& A, const TwistedGeometry& g, int patch, const double* p, int t_nodes = 12);
double deck_shift_defect(const UnitaryFamily& A, const TwistedGeometry& g, int samples, unsigned seed);

// Pointwise closedness |d omega| of a form given by its components, by finite differences.
double pointwise_closedness(const std::function<ScalarForm(const double*)>& w, int dim, const double* p, double h = 1e-3);

// ---------------------------------------------------------------------------
// Symbols on the fiber circle and their index data.

// a(theta) = sum_j coeffs[j] e^{2 pi i modes[j] theta}
struct FiberSymbol {
  int rank = 1;
  std::vector<int> modes;
  std::vector<CMatrix> coeffs;
  CMatrix at(double theta) const;
  CMatrix dtheta(double theta) const;
  FiberSymbol adjoint() const;  // pointwise adjoint; the inverse when unitary
  static FiberSymbol identity(int rank);
};

// Elliptic symbol data with ends a+ (xi -> +infinity) and a- (xi -> -infinity).
struct SymbolData {
  FiberSymbol plus, minus;
};

// Smooth step 0 (xi <= -1) to 1 (xi >= 1).
double transition_step(double xi);

// Left quantization of chi(xi) a+ + (1 - chi(xi)) a- at xi = k - f on the band.
CMatrix quantize_ends(const SymbolData& s, const ModeBand& band, double f);

// E1, E0 and their derivatives for P = Op(p), Q = Op(p^-1 at the ends);
// products are formed on a margin-extended band so E1 - E0 is exact.
struct IdempotentFamilyPoint {
  ModeBand band;       // inner band
  CMatrix E1, E0, D;   // on (band) + (band)
  std::vector<CMatrix> dE1;
  cd trace;                       // tr(E1 - E0)
  double idempotency_residual = 0;
  double edge_mass = 0;           // |E1 - E0| on the outermost inner modes
};
IdempotentFamilyPoint index_idempotent_family(const SymbolData& s, const std::vector<SymbolData>& ds, double f,
                                              const std::vector<double>& df, int half_width = 4, int margin = 4);

// Family of symbols over a base chart: symbol(patch, p) and its derivatives
// along the local base directions of TwistedGeometry::at.
struct SymbolFamily {
  std::string name;
  std::function<SymbolData(int patch, const double* p)> symbol;
  int base_dirs = 3;
  bool on_sphere_only = false;  // base is S^2 (p = P[3]); otherwise (x, P[3])
};
// Untwisted Bott symbol a+ = e^{2 pi i theta} e_y + (1 - e_y), a- = 1 on S^2.
SymbolFamily bott_family();
// Bott symbol with e_{R(x) y}, R(x) a rotation about the first axis by 0.5 sin(2 pi x).
SymbolFamily rotating_bott_family();
// a+ = SU(2) matrix of psi = e^{2 pi i theta} tau_patch(y) on L~ = S^1 x S^3, a- = 1.
SymbolFamily hopf_su2_family();

// Analytic index character of the family at a point (even scalar form in the
// local base directions).
ScalarForm analytic_character_at(const SymbolFamily& fam, const TwistedGeometry* g, int patch, const double* p);
// (-1)^n phi_* (e^mu ^ (Ch(a+) - Ch(a-))) with fiber-last integration; Todd = 1.
ScalarForm topological_character_at(const SymbolFamily& fam, const TwistedGeometry* g, int patch, const double* p,
                                    int theta_points = 32);
constexpr int kIndexSign = 1;  // overall sign, fixed by the Bott oracle in degree 0

// Relative symbol character: odd forms Ch(a+) and Ch(a-) on the two copies of
// S*(Y/X) = Y x {+-}, as components at a point of Y (base directions, then theta).
struct RelativeChern {
  ScalarForm plus, minus;
  ScalarForm even;  // Ch(E+) - Ch(E-), zero for trivial E+-
};
RelativeChern relative_symbol_chern(const SymbolData& s, const std::vector<SymbolData>& ds, double theta);

// Fiber winding pairing of the relative class: (1/2 pi i) int tr(a^-1 da) over theta, a+ minus a-.
double relative_fiber_pairing(const SymbolData& s, int theta_points = 64);

// Discretized relative form on a chart of Y (x-interval x face x theta circle):
// closedness residual of R(Ch(a+)) for the convergence study.
struct RelativeResidual {
  double h = 0, residual = 0;
};
RelativeResidual relative_cocycle_residual(const SymbolFamily& fam, const TwistedGeometry& g, int n, int quadrature = 1);

// Characters of a family integrated over the sphere at fixed x (degree-0 value
// at the sample point and degree-2 pairing against [S^2]).
struct SpherePairing {
  double degree0 = 0, degree2 = 0, degree0_spread = 0;
};
// w takes base points (x, P[3]).
SpherePairing pair_on_sphere(const std::function<ScalarForm(int patch, const double* p)>& w, int n, int q, double x = 0.0);

// Index theorem comparison on S^2 (untwisted).
struct IndexComparison {
  SpherePairing analytic, topological;
  double difference = 0;
};
IndexComparison compare_bott_index(int n = 4, int q = 6);

// Index theorem comparison on the twisted S^1 x S^2 scenario: both characters
// are de Rham mapped and projected on the twisted-harmonic even cochains.
struct TwistedIndexComparison {
  int M = 0, n = 0;
  double analytic_coordinate = 0, topological_coordinate = 0;  // in units of beta_bar
  double projection_norm = 0;  // harmonic projection of the difference, same units
  double analytic_closedness = 0, topological_closedness = 0;
  double analytic_degree0 = 0;
  HodgeDims dims;
};
TwistedIndexComparison compare_twisted_index(int M, int n, int q, int winding = 1, double eps = 0.0);

// Cohomological index: (-1)^n phi_* rho_* (Todd ^ Ch) as a discrete form on a base mesh.
DiscreteForm index_in_cohomology(const SymbolFamily& fam, const TwistedGeometry* g, std::shared_ptr<const ProductMesh> base,
                                 int q);
DiscreteForm analytic_index_form(const SymbolFamily& fam, const TwistedGeometry* g, std::shared_ptr<const ProductMesh> base,
                                 int q);

}  // namespace tk
