#pragma once

#include "tk/series.hpp"

#include <Eigen/Dense>
#include "json.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tk {

using Simplex = std::vector<int>;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ManifoldTag { Point, Circle, Sphere2, Torus2, CircleTimesSphere2, Torus3 };
std::string to_string(ManifoldTag t);

// Factor nerves used to build the catalog. Circle3 is the three-arc cover of
// the circle, Tetra the boundary of the tetrahedron (open stars on S^2), Octa the
// six-face cube-sphere cover.
enum class FactorKind { Point, Circle3, Tetra, Octa };

struct Nerve {
  int vertex_count = 0;
  std::vector<std::vector<Simplex>> simplices;  // simplices[k] = k-simplices
  ManifoldTag manifold_tag = ManifoldTag::Point;

  // product structure: vertex v has coordinate factor_vertex[v][f] in factor f
  std::vector<FactorKind> factors;
  std::vector<std::vector<int>> factor_vertex;

  int top_degree() const { return static_cast<int>(simplices.size()) - 1; }
  int count(int k) const {
    return (k >= 0 && k <= top_degree()) ? static_cast<int>(simplices[k].size()) : 0;
  }
  int index_of(const Simplex& s) const;  // -1 when absent

  // maximal simplices and, for each k-simplex, the maximal simplices containing it
  const std::vector<Simplex>& maximal() const { return maximal_; }
  const std::vector<int>& witnesses(int k, int i) const { return witness_[k][i]; }
  int witness_count(int k, int i) const { return static_cast<int>(witness_[k][i].size()); }

  void finalize();  // validates and builds lookup tables

 private:
  std::vector<std::map<Simplex, int>> lookup_;
  std::vector<Simplex> maximal_;
  std::vector<std::vector<std::vector<int>>> witness_;
};

Nerve single_patch_nerve();
Nerve circle_nerve();
Nerve sphere_nerve();     // tetrahedron boundary
Nerve octahedral_nerve(); // cube-sphere faces
Nerve product_nerve(const Nerve& a, const Nerve& b);
Nerve catalog_nerve(ManifoldTag tag);

// Point in the geometric realization, one coordinate block per factor:
// circle factors use an unwrapped real coordinate, sphere factors a unit vector.
struct RealizedPoint {
  std::vector<double> circle;
  std::vector<std::array<double, 3>> sphere;
};
RealizedPoint witness_point(const Nerve& n, int maximal_index);
// exact circle coordinate of a witness point (first circle factor)
Rational witness_circle_coordinate(const Nerve& n, int maximal_index);
std::array<double, 3> sphere_vertex_direction(FactorKind kind, int v);

enum class Coefficients { Integer, Real, Circle };
std::string to_string(Coefficients c);

// Values are stored per (simplex, witness): each simplex carries one sample for
// every maximal simplex containing it. Integer cochains are constant across
// samples. Circle cochains keep real lifts; circle_value() reports them mod 1.
struct CechCochain {
  int degree = 0;
  Coefficients coefficients = Coefficients::Integer;
  std::vector<std::vector<double>> values;

  static CechCochain zero(const Nerve& n, int degree, Coefficients c);
  static CechCochain constant(const Nerve& n, int degree, Coefficients c,
                              const std::vector<double>& per_simplex);

  double value(int simplex, int sample = 0) const { return values[simplex][sample]; }
  double circle_value(int simplex, int sample = 0) const;
  std::int64_t integer_value(int simplex) const;
  IntVector integer_vector() const;
};

// Samples of a simplex are matched by maximal-simplex id; sample_of(n,k,i,m)
// returns the position of maximal simplex m in the witness list of (k,i).
int sample_of(const Nerve& n, int k, int i, int maximal_index);

CechCochain coboundary(const CechCochain& c, const Nerve& n);
CechCochain cup(const CechCochain& p, const CechCochain& q, const Nerve& n);
CechCochain add(const CechCochain& a, const CechCochain& b);
CechCochain scale(const CechCochain& a, double s);

// Max deviation of the coboundary from zero (mod 1 for circle coefficients).
double cocycle_defect(const CechCochain& c, const Nerve& n, int* worst_simplex = nullptr);
bool is_cocycle(const CechCochain& c, const Nerve& n, double tol = 1e-9);

struct CohomologyGroup {
  int free_rank = 0;
  std::vector<std::int64_t> torsion;
  bool operator==(const CohomologyGroup&) const = default;
};

CohomologyGroup cohomology(const Nerve& n, int k, Coefficients coeff);
IntMatrix coboundary_matrix(const Nerve& n, int k);

struct SmithForm {
  IntMatrix U, V, Vinv;              // U * A * V = D
  std::vector<std::int64_t> diagonal;  // nonzero invariant factors
};
SmithForm smith_normal_form(const IntMatrix& a);

IntVector class_coordinates(const CechCochain& z, const Nerve& n);
IntVector fundamental_cycle(const Nerve& n);  // integer generator of H_top
std::int64_t pair_with_cycle(const CechCochain& z, const IntVector& cycle);

struct CircleValuedMap {
  // local lift f_j sampled at the witness points of each patch (vertex j), exact
  std::vector<std::vector<Rational>> local_lifts;
  CechCochain transitions;  // integer 1-cocycle n_jk = f_j - f_k
  void validate(const Nerve& n) const;
};

// u: circle-coordinate map of winding w on the first circle factor of n.
CircleValuedMap winding_map(const Nerve& n, int winding);
// Rebranches the lift on patch j by +shift (changes n by a coboundary).
CircleValuedMap rebranch(const CircleValuedMap& u, const Nerve& n, int patch, int shift);

// Circle 1-cocycle of the degree-k line bundle pulled back from the sphere
// factor, sampled at witness points with continuous lifts.
CechCochain sphere_line_bundle_cocycle(const Nerve& n, int degree);
// Multiplies a circle 1-cochain by the coboundary of smooth functions g_j.
CechCochain twist_by_coboundary(const CechCochain& c, const Nerve& n, unsigned seed);

CechCochain dd_cocycle(const CircleValuedMap& u, const CechCochain& c, const Nerve& n);
CechCochain bockstein(const CechCochain& d, const Nerve& n);

nlohmann::json to_json(const Nerve& n, const std::vector<CechCochain>& cochains);

}  // namespace tk
