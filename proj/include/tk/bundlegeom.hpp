#pragma once

#include "tk/cech.hpp"
#include "tk/mesh.hpp"

#include <complex>
#include <optional>

namespace tk {

// Cube-sphere charts: patch p has outward normal sign*e_axis with
// axis = p / 2 and sign = +1 for even p.
constexpr int kSpherePatches = 6;
inline int patch_axis(int p) { return p / 2; }
inline int patch_sign(int p) { return p % 2 == 0 ? 1 : -1; }
bool point_in_patch(int p, const double* P);

// Local section of the tautological (Hopf) line: tau_p(y) = P_y w_p / |P_y w_p|.
Eigen::Vector2cd hopf_section(int p, const double* y);
// theta_jk(y) = arg(tau_j^* tau_k) / 2pi in (-1/2, 1/2], so tau_k = tau_j e^{2 pi i theta_jk}
double hopf_transition(int j, int k, const double* P);
// Connection A_p = Im(tau_p^* d tau_p) / 2pi pulled back to cube coordinates.
void hopf_connection(int p, const double* P, double out[3]);

// Layout of a base mesh: the first factor is the circle carrying the twist
// coordinate x; an optional cube-sphere factor carries the line bundle.
struct BaseLayout {
  int sphere_factor = -1;
  int sphere_param = -1;   // offset of the cube coordinates in the parameter vector
  int second_circle_param = -1;
  static BaseLayout of(const ProductMesh& m);
};

struct LineBundleReport {
  double overlap_defect = 0;  // max |A_k - A_j - d theta_jk| mod 1 over overlap edges
  std::vector<double> periods;  // curvature integrals over the sphere slices
  double period_defect = 0;
};

struct HermitianLineBundle {
  std::shared_ptr<const ProductMesh> base;
  BaseLayout layout;
  int degree = 0;
  int quadrature = 8;
  std::vector<Eigen::VectorXd> local_connection;  // per patch; NaN off the patch
  DiscreteForm curvature;                         // beta_bar

  int patch_count() const { return static_cast<int>(local_connection.size()); }
  bool cell_in_patch(int k, int cell, int patch) const;
  int first_patch(int k, int cell) const;
  double transition(int j, int k, const double* p) const;      // lifted theta_jk at a parameter point
  double connection(int patch, const double* p, int axis) const;  // smooth A_patch component
  SmoothForm connection_form(int patch, int param_offset) const;  // A on a mesh whose sphere sits at offset
  SmoothForm curvature_form(int param_offset) const;
  LineBundleReport validate(double tol = 1e-9) const;
};

// Degree-k line bundle pulled back from the sphere factor of `base` (trivial
// when the base has no sphere factor or k = 0).
HermitianLineBundle make_line_bundle(std::shared_ptr<const ProductMesh> base, int degree, int quadrature = 8);

struct Cycle {
  int degree = 1;
  Eigen::VectorXd chain;
  std::optional<Eigen::VectorXd> bounds;  // a chain c with boundary(c) = chain
};

// Equator z = 0 of the sphere factor (counterclockwise about +z) bounding the
// upper hemisphere; the other factors sit at vertex 0. Needs an even lattice.
Cycle equator_cycle(const ProductMesh& m);
// Boundary of the lattice block [i0,i1) x [j0,j1) of face p (sphere factor only).
Cycle square_cycle(const ProductMesh& m, int patch, int i0, int i1, int j0, int j1);
// Holonomy mod 1 in [0,1), with transition corrections between charts.
double holonomy(const HermitianLineBundle& L, const Cycle& z);
double flux(const HermitianLineBundle& L, const Eigen::VectorXd& chain2);

// Circle bundle of L, one chart per patch: base chart x fiber circle with
// fiber coordinate theta_j; on overlaps theta_k = theta_j - theta_jk.
struct TotalChart {
  int patch = 0;
  std::shared_ptr<const ProductMesh> base;   // base restricted to the patch
  std::shared_ptr<const ProductMesh> total;  // base x fiber
  SmoothForm gamma_smooth;                   // d theta + A_patch
  SmoothForm beta_smooth;                    // curvature pulled back
  DiscreteForm gamma;
  DiscreteForm beta;  // d gamma
};

struct CircleBundleTotal {
  std::shared_ptr<const HermitianLineBundle> bundle;
  int fiber_points = 0;
  std::vector<TotalChart> charts;
  int fiber_factor() const { return charts.front().total->factor_count() - 1; }
  int fiber_param() const { return charts.front().total->param_dim() - 1; }
};

CircleBundleTotal build_circle_bundle(std::shared_ptr<const HermitianLineBundle> L, int fiber_points);

// Lifted twist function f with f(x + 1) = f(x) + winding, plus a smooth
// non-product perturbation of size eps.
struct TwistFunction {
  int winding = 0;
  double eps = 0;
  BaseLayout layout;
  double value(const double* p) const;  // x taken in the given parameter (unwrapped)
  double grad(const double* p, int axis) const;
  SmoothForm df() const;
};

// alpha_bar = R(df) on any mesh whose first factor is the x-circle.
DiscreteForm alpha_bar(std::shared_ptr<const ProductMesh> m, const TwistFunction& f);

// Winding of a circle-valued map on the nerve relative to the circle generator.
int winding_of(const CircleValuedMap& u, const Nerve& n);

struct PrimitiveChart {
  std::shared_ptr<const ProductMesh> pair;  // base chart x theta1 x theta2
  DiscreteForm alpha;        // df on the base chart
  DiscreteForm f0;           // lifted f at vertices (x in [0,1))
  DiscreteForm seam;         // winding on the x-edges crossing x = 0
  DiscreteForm dlog_s;       // d of the shift character
  DiscreteForm connection;   // f dlog s
  DiscreteForm curvature;    // F of the connection, deck transition included
  DiscreteForm gamma1, gamma2;
};

struct PrimitiveBundle {
  const CircleBundleTotal* total = nullptr;
  TwistFunction f;
  std::vector<PrimitiveChart> charts;
};

// Additive shift character s(z1, z2) = theta1 - theta2 mod 1 in units of 1/M.
inline int shift_character(int i1, int i2, int M) { return ((i1 - i2) % M + M) % M; }
double shift_character_residual(const CircleBundleTotal& t, int chart);  // dlog s vs pi1*gamma - pi2*gamma

PrimitiveBundle build_primitive_bundle(const CircleBundleTotal& t, int winding, double eps);
PrimitiveBundle build_primitive_bundle(const CircleValuedMap& u, const Nerve& n, const CircleBundleTotal& t, double eps);

struct PrimitivityReport {
  long transition_defect = 0;     // integer units of 1/M; exact
  long associativity_defect = 0;  // Y^[4] check; exact
  long deck_defect = 0;           // transition rule under x -> x + n
  double connection_defect = 0;
  double chart_change_defect = 0;  // s computed in two charts
};
PrimitivityReport check_primitivity(const PrimitiveBundle& J, int samples = 2000, unsigned seed = 1);

struct CurvatureReport {
  std::vector<DiscreteForm> mu;   // per chart, df ^ gamma on the total chart
  double F_residual = 0;          // F - (pi1*mu_ref - pi2*mu_ref), density sup
  double dmu_residual = 0;        // d mu + phi*(alpha ^ beta)_ref, density sup
  double F_exact_residual = 0;    // same with the discrete mu
  double dmu_exact_residual = 0;
  double F_period = 0;            // integral over the x-loop x theta1-loop
  double h = 0;
};
CurvatureReport curvature_report(const PrimitiveBundle& J, int quadrature = 4);

}  // namespace tk
