#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace tk {

// One cell of a factor complex: an axis-aligned box in the factor's parameter
// space. faces[i] = {lower, upper} face indices along the i-th free axis.
struct FactorCell {
  std::array<double, 3> lower{0, 0, 0};
  std::vector<int> axes;
  std::vector<double> h;
  std::vector<std::array<int, 2>> faces;
};

enum class FactorType { Circle, Interval, Lattice };

// Factor complexes: periodic circle grid, interval grid, and cubical subsets of
// a Z^3 lattice embedded in the cube [-1,1]^3 (cube sphere, single face boxes).
struct Factor {
  FactorType type = FactorType::Circle;
  std::string name;
  int param_dim = 1;
  std::vector<std::vector<FactorCell>> cells;  // by dimension
  int dim() const { return static_cast<int>(cells.size()) - 1; }
  int count(int k) const { return (k >= 0 && k <= dim()) ? static_cast<int>(cells[k].size()) : 0; }
};

Factor circle_grid(int m, std::string name = "circle");
Factor interval_grid(int n, double a, double b, std::string name = "interval");
// Surface of [-1,1]^3 with n x n cells per face.
Factor cube_sphere(int n);
// One closed face of the cube sphere (outward normal sign*e_axis), n x n cells.
Factor face_patch(int n, int normal_axis, int normal_sign);
// +1/-1 orientation of each top cell of a factor relative to its standard
// orientation (outward normal first on the cube sphere).
std::vector<int> top_orientation(const Factor& f);

// Product of factor complexes; cells are tuples of factor cells. Directions of a
// product cell are the factor directions concatenated in factor order, and the
// global parameter space is the concatenation of factor parameter spaces.
class ProductMesh {
 public:
  explicit ProductMesh(std::vector<Factor> factors);

  int dim() const { return dim_; }
  int param_dim() const { return param_dim_; }
  int factor_count() const { return static_cast<int>(factors_.size()); }
  const Factor& factor(int f) const { return factors_[f]; }
  int param_offset(int f) const { return param_offset_[f]; }
  int count(int k) const { return (k >= 0 && k <= dim_) ? total_[k] : 0; }

  // decoding / encoding of product cells
  struct Cell {
    std::vector<int> deg;  // per factor
    std::vector<int> idx;  // per factor
  };
  Cell decode(int k, int global) const;
  int encode(const Cell& c) const;

  // Directions of a product cell as (factor, position in that factor cell's axes)
  std::vector<std::array<int, 2>> directions(const Cell& c) const;
  // Global parameter axis of each direction
  std::vector<int> param_axes(const Cell& c) const;
  // Face of c obtained by fixing direction d (index into directions()) at end e
  Cell face(const Cell& c, int d, int e) const;
  double measure(const Cell& c) const;  // product of parameter extents
  // signed sum of all top cells: the fundamental chain when every factor is closed
  Eigen::VectorXd top_chain() const;
  const std::vector<std::vector<int>>& subface_table(int f, int k) const { return sub_[f][k]; }
  // block id for a multidegree (or -1) and the block layout
  int block_of(int k, const std::vector<int>& deg) const;
  int block_of(int k, const int* deg) const;
  int block_offset(int k, int b) const { return blocks_[k][b].offset; }
  const std::vector<int>& block_deg(int k, int b) const { return blocks_[k][b].deg; }
  int block_count(int k) const { return static_cast<int>(blocks_[k].size()); }
  int encode_in_block(int k, int b, const int* idx) const;

  // Pointwise geometry of a cell: lower corner and extents per direction
  void geometry(const Cell& c, std::vector<double>& lower, std::vector<double>& h,
                std::vector<int>& axes) const;

 private:
  std::vector<Factor> factors_;
  int dim_ = 0, param_dim_ = 0;
  std::vector<int> param_offset_;
  std::vector<int> total_;
  // blocks per degree: multidegree, offset, size, strides
  struct Block {
    std::vector<int> deg;
    int offset = 0, size = 0;
    std::vector<int> stride;
  };
  std::vector<std::vector<Block>> blocks_;
  std::vector<std::vector<int>> block_lookup_;  // degree -> code -> block id
  // sub_[f][k][i][mask * 4 + ends]: face of factor cell (k,i) after removing the
  // masked axes (highest first) at the given ends
  std::vector<std::vector<std::vector<std::vector<int>>>> sub_;
  int code(const std::vector<int>& deg) const;
};

// A smooth k-form on the parameter space: component(point, axes) returns
// omega(e_{axes[0]}, ..., e_{axes[k-1]}) for the global parameter axes given.
struct SmoothForm {
  int degree = 0;
  std::function<double(const double* p, const int* axes)> component;
};

// Exterior product of smooth forms (shuffle sum over the axes).
SmoothForm smooth_wedge(const SmoothForm& a, const SmoothForm& b);
SmoothForm smooth_sum(const SmoothForm& a, const SmoothForm& b, double sb = 1.0);

// Cochain vector per degree.
class DiscreteForm {
 public:
  DiscreteForm() = default;
  explicit DiscreteForm(std::shared_ptr<const ProductMesh> mesh);
  static DiscreteForm homogeneous(std::shared_ptr<const ProductMesh> mesh, int degree, Eigen::VectorXd v);

  const ProductMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const ProductMesh> mesh_ptr() const { return mesh_; }
  // Components are allocated on first mutable access; an empty component is zero.
  Eigen::VectorXd& operator[](int k);
  const Eigen::VectorXd& operator[](int k) const { return comp_[k]; }
  bool has(int k) const { return k >= 0 && k <= dim() && comp_[k].size() > 0; }
  double at(int k, int i) const { return has(k) ? comp_[k][i] : 0.0; }
  int dim() const { return mesh_->dim(); }

  DiscreteForm& operator+=(const DiscreteForm& o);
  DiscreteForm& operator-=(const DiscreteForm& o);
  DiscreteForm operator+(const DiscreteForm& o) const { auto r = *this; r += o; return r; }
  DiscreteForm operator-(const DiscreteForm& o) const { auto r = *this; r -= o; return r; }
  DiscreteForm operator*(double s) const;
  DiscreteForm part(int k) const;         // only the degree-k component
  DiscreteForm even() const;
  DiscreteForm odd() const;
  double max_abs() const;
  // sup over cells of |value| / cell measure
  double density_sup() const;

 private:
  std::shared_ptr<const ProductMesh> mesh_;
  std::vector<Eigen::VectorXd> comp_;
};

void require_same_mesh(const DiscreteForm& a, const DiscreteForm& b);

Eigen::VectorXd coboundary(const ProductMesh& m, int k, const Eigen::VectorXd& v);
// boundary of a k-chain (transpose of the coboundary)
Eigen::VectorXd boundary(const ProductMesh& m, int k, const Eigen::VectorXd& chain);
// product of per-factor chains (degree, coefficients over that factor's cells)
Eigen::VectorXd product_chain(const ProductMesh& m, const std::vector<std::pair<int, Eigen::VectorXd>>& per_factor);
DiscreteForm d(const DiscreteForm& w);
// Cubical cup product averaged over the reflections of each cube.
DiscreteForm wedge(const DiscreteForm& a, const DiscreteForm& b);

// de Rham map: integrates a smooth form over every k-cell with an
// order-q tensor Gauss-Legendre rule (q = 1 is the midpoint rule).
Eigen::VectorXd de_rham(const ProductMesh& m, const SmoothForm& w, int q);
DiscreteForm de_rham_form(std::shared_ptr<const ProductMesh> m, const std::vector<SmoothForm>& parts, int q);

// Pullback along a product projection: factor f of the source is factor
// factor_map[f] of the target; remaining target factors are projected away.
DiscreteForm pullback(const DiscreteForm& w, std::shared_ptr<const ProductMesh> target,
                      const std::vector<int>& factor_map);

// Index in `full` of each k-cell of `sub` (a lattice subset, or an identical factor).
std::vector<int> embed_cells(const Factor& sub, const Factor& full, int k);
// Restriction to a mesh whose factors are sub-complexes of the source factors.
DiscreteForm restrict_form(const DiscreteForm& w, std::shared_ptr<const ProductMesh> sub);

// Operators along a periodic circle factor (the fiber).
DiscreteForm interior_fiber(const DiscreteForm& w, int fiber_factor);
DiscreteForm lie_fiber(const DiscreteForm& w, int fiber_factor);

// Gauss-Legendre nodes and weights on [0,1]
void gauss_legendre01(int q, std::vector<double>& x, std::vector<double>& w);

// Cube-sphere geometry: y = P/|P| and its Jacobian dy/dP.
std::array<double, 3> sphere_point(const double* P);
void sphere_jacobian(const double* P, double J[3][3]);

}  // namespace tk
