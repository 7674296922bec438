#pragma once

#include "tk/bundlegeom.hpp"

#include <string>

namespace tk {

// Closed 3-form twisting d into D = d + delta_bar ^.
struct TwistData {
  DiscreteForm delta_bar;
  double closedness_residual = 0;
  std::vector<double> periods;  // over the fundamental chain when the mesh is closed and 3-dimensional
  std::string normalization = "delta_bar = alpha_bar ^ beta_bar, integral periods";
};

TwistData make_twist(DiscreteForm delta_bar, double tol = 1e-9);
TwistData zero_twist(std::shared_ptr<const ProductMesh> m);

DiscreteForm twisted_d(const DiscreteForm& v, const TwistData& t);
double twisted_square_residual(const DiscreteForm& v, const TwistData& t);

struct HodgeDims {
  int even_dim = 0, odd_dim = 0;
  int even_size = 0, odd_size = 0;
  double sigma_max = 0, threshold = 0;
  double gap_ratio = 0;  // smallest singular value above the threshold / threshold
  bool ambiguous = false;
};

// Harmonic dimensions of D on even and odd total degree, from the singular
// values of D + D^T restricted to even forms (plain cochain inner product).
// even_harmonic, when given, receives an orthonormal basis of the harmonic
// even cochains (degrees concatenated in increasing order).
HodgeDims twisted_cohomology_dims(std::shared_ptr<const ProductMesh> m, const TwistData& t, double rel_threshold = 1e-6,
                                  Eigen::MatrixXd* even_harmonic = nullptr);
// Even cochains of a form concatenated in increasing degree.
Eigen::VectorXd even_vector(const DiscreteForm& w);

// S(v) = exp(-alpha ^ gamma) ^ p*v on every chart of the circle bundle.
std::vector<DiscreteForm> subcomplex_map(const DiscreteForm& v, const CircleBundleTotal& tot, const DiscreteForm& alpha);

struct SubcomplexResiduals {
  double lie = 0;   // L_dtheta v~
  double iota = 0;  // i_dtheta v~ - alpha ^ v~
};
SubcomplexResiduals subcomplex_conditions(const std::vector<DiscreteForm>& vt, const CircleBundleTotal& tot,
                                          const DiscreteForm& alpha);

// max over charts of |d S(v) - S((d + delta_bar) v)| as a density
double conjugation_check(const DiscreteForm& v, const CircleBundleTotal& tot, const DiscreteForm& alpha,
                         const TwistData& t);

// The standard twisted scenario on S^1 x S^2 (or S^1 alone when n = 0).
struct TwistedScenario {
  std::shared_ptr<const ProductMesh> base;
  std::shared_ptr<const HermitianLineBundle> bundle;
  std::shared_ptr<const CircleBundleTotal> total;  // null unless fiber_points > 0
  TwistFunction f;
  DiscreteForm alpha;
  TwistData twist;
};
TwistedScenario make_scenario(int M, int n, int degree, int winding, double eps, int fiber_points = 0);

// Smooth test functions g = cos(2 pi k x + phi) (c0 + c . y) on S^1 x S^2.
struct TrigFunction {
  int k = 0;
  double phi = 0, c0 = 1;
  std::array<double, 3> c{0, 0, 0};
  int sphere_param = 1;
  double value(const double* p) const;
  double grad(const double* p, int axis) const;
};
// Random form with parts g1 + g2 dg3 + g4 dg5 ^ dg6 (+ g7 dg8 ^ dg9 ^ dg10 in degree 3).
DiscreteForm random_trig_form(std::shared_ptr<const ProductMesh> m, unsigned seed, int quadrature = 3);

}  // namespace tk
