#include "tk/cech.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace tk {

namespace {

std::int64_t checked(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("integer overflow in Smith normal form");
  return static_cast<std::int64_t>(v);
}

std::string simplex_key(const Simplex& s) {
  std::string k;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) k += ",";
    k += std::to_string(s[i]);
  }
  return k;
}

Simplex face(const Simplex& s, std::size_t drop) {
  Simplex f;
  f.reserve(s.size() - 1);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (i != drop) f.push_back(s[i]);
  return f;
}

Nerve from_simplices(int vertices, const std::vector<Simplex>& generators, ManifoldTag tag,
                     std::vector<FactorKind> factors, std::vector<std::vector<int>> fv) {
  std::vector<std::set<Simplex>> by_degree;
  for (const auto& g : generators) {
    int m = static_cast<int>(g.size());
    for (int mask = 1; mask < (1 << m); ++mask) {
      Simplex s;
      for (int i = 0; i < m; ++i)
        if (mask & (1 << i)) s.push_back(g[i]);
      int k = static_cast<int>(s.size()) - 1;
      if (static_cast<int>(by_degree.size()) <= k) by_degree.resize(k + 1);
      by_degree[k].insert(s);
    }
  }
  Nerve n;
  n.vertex_count = vertices;
  n.manifold_tag = tag;
  for (auto& set : by_degree) n.simplices.emplace_back(set.begin(), set.end());
  n.factors = std::move(factors);
  n.factor_vertex = std::move(fv);
  n.finalize();
  return n;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

std::string to_string(ManifoldTag t) {
  switch (t) {
    case ManifoldTag::Point: return "Point";
    case ManifoldTag::Circle: return "Circle";
    case ManifoldTag::Sphere2: return "Sphere2";
    case ManifoldTag::Torus2: return "Torus2";
    case ManifoldTag::CircleTimesSphere2: return "CircleTimesSphere2";
    case ManifoldTag::Torus3: return "Torus3";
  }
  return "?";
}

std::string to_string(Coefficients c) {
  switch (c) {
    case Coefficients::Integer: return "Z";
    case Coefficients::Real: return "R";
    case Coefficients::Circle: return "U1";
  }
  return "?";
}

int Nerve::index_of(const Simplex& s) const {
  int k = static_cast<int>(s.size()) - 1;
  if (k < 0 || k >= static_cast<int>(lookup_.size())) return -1;
  auto it = lookup_[k].find(s);
  return it == lookup_[k].end() ? -1 : it->second;
}

void Nerve::finalize() {
  if (simplices.empty() || simplices[0].empty()) throw StructuralError("empty nerve");
  if (static_cast<int>(simplices[0].size()) != vertex_count)
    throw StructuralError("degree-0 simplices must enumerate all vertices");
  lookup_.assign(simplices.size(), {});
  for (std::size_t k = 0; k < simplices.size(); ++k) {
    std::sort(simplices[k].begin(), simplices[k].end());
    for (std::size_t i = 0; i < simplices[k].size(); ++i) {
      const auto& s = simplices[k][i];
      if (s.size() != k + 1) throw StructuralError("simplex of wrong length in degree " + std::to_string(k));
      for (std::size_t a = 1; a < s.size(); ++a)
        if (s[a - 1] >= s[a]) throw StructuralError("simplex tuple not strictly increasing: " + simplex_key(s));
      lookup_[k][s] = static_cast<int>(i);
    }
  }
  for (std::size_t k = 1; k < simplices.size(); ++k)
    for (const auto& s : simplices[k])
      for (std::size_t d = 0; d < s.size(); ++d)
        if (!lookup_[k - 1].count(face(s, d)))
          throw StructuralError("missing face of simplex " + simplex_key(s));

  // maximal simplices: not a face of anything listed
  std::vector<std::vector<bool>> covered(simplices.size());
  for (std::size_t k = 0; k < simplices.size(); ++k) covered[k].assign(simplices[k].size(), false);
  for (std::size_t k = 1; k < simplices.size(); ++k)
    for (const auto& s : simplices[k])
      for (std::size_t d = 0; d < s.size(); ++d) covered[k - 1][lookup_[k - 1][face(s, d)]] = true;
  maximal_.clear();
  for (std::size_t k = 0; k < simplices.size(); ++k)
    for (std::size_t i = 0; i < simplices[k].size(); ++i)
      if (!covered[k][i]) maximal_.push_back(simplices[k][i]);

  witness_.assign(simplices.size(), {});
  for (std::size_t k = 0; k < simplices.size(); ++k) witness_[k].assign(simplices[k].size(), {});
  for (std::size_t m = 0; m < maximal_.size(); ++m) {
    const auto& g = maximal_[m];
    int sz = static_cast<int>(g.size());
    for (int mask = 1; mask < (1 << sz); ++mask) {
      Simplex s;
      for (int i = 0; i < sz; ++i)
        if (mask & (1 << i)) s.push_back(g[i]);
      witness_[s.size() - 1][lookup_[s.size() - 1][s]].push_back(static_cast<int>(m));
    }
  }
  if (factor_vertex.empty()) {
    factors = {FactorKind::Point};
    factor_vertex.assign(vertex_count, {0});
  }
}

Nerve single_patch_nerve() {
  return from_simplices(1, {{0}}, ManifoldTag::Point, {FactorKind::Point}, {{0}});
}

Nerve circle_nerve() {
  return from_simplices(3, {{0, 1}, {1, 2}, {0, 2}}, ManifoldTag::Circle, {FactorKind::Circle3},
                        {{0}, {1}, {2}});
}

Nerve sphere_nerve() {
  return from_simplices(4, {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}, ManifoldTag::Sphere2,
                        {FactorKind::Tetra}, {{0}, {1}, {2}, {3}});
}

Nerve octahedral_nerve() {
  // faces +x,-x,+y,-y,+z,-z; three mutually adjacent faces meet at a cube corner
  std::vector<Simplex> tri;
  for (int a : {0, 1})
    for (int b : {2, 3})
      for (int c : {4, 5}) tri.push_back({a, b, c});
  return from_simplices(6, tri, ManifoldTag::Sphere2, {FactorKind::Octa},
                        {{0}, {1}, {2}, {3}, {4}, {5}});
}

Nerve product_nerve(const Nerve& a, const Nerve& b) {
  int nb = b.vertex_count;
  std::vector<Simplex> gens;
  for (const auto& s : a.maximal())
    for (const auto& t : b.maximal()) {
      int p = static_cast<int>(s.size()) - 1, q = static_cast<int>(t.size()) - 1;
      // lattice paths from (0,0) to (p,q): choose which of the p+q steps move in a
      std::vector<int> steps(p + q, 1);
      std::fill(steps.begin(), steps.begin() + p, 0);
      do {
        Simplex chain;
        int i = 0, j = 0;
        chain.push_back(s[i] * nb + t[j]);
        for (int st : steps) {
          if (st == 0) ++i; else ++j;
          chain.push_back(s[i] * nb + t[j]);
        }
        gens.push_back(chain);
      } while (std::next_permutation(steps.begin(), steps.end()));
    }
  std::vector<FactorKind> factors = a.factors;
  factors.insert(factors.end(), b.factors.begin(), b.factors.end());
  std::vector<std::vector<int>> fv(a.vertex_count * nb);
  for (int i = 0; i < a.vertex_count; ++i)
    for (int j = 0; j < nb; ++j) {
      auto v = a.factor_vertex[i];
      v.insert(v.end(), b.factor_vertex[j].begin(), b.factor_vertex[j].end());
      fv[i * nb + j] = v;
    }
  ManifoldTag tag = ManifoldTag::Point;
  auto ta = a.manifold_tag, tb = b.manifold_tag;
  if (ta == ManifoldTag::Circle && tb == ManifoldTag::Circle) tag = ManifoldTag::Torus2;
  else if (ta == ManifoldTag::Torus2 && tb == ManifoldTag::Circle) tag = ManifoldTag::Torus3;
  else if (ta == ManifoldTag::Circle && tb == ManifoldTag::Sphere2) tag = ManifoldTag::CircleTimesSphere2;
  else if (ta == ManifoldTag::Point) tag = tb;
  else if (tb == ManifoldTag::Point) tag = ta;
  else throw StructuralError("product not in the nerve catalog");
  return from_simplices(a.vertex_count * nb, gens, tag, factors, fv);
}

Nerve catalog_nerve(ManifoldTag tag) {
  switch (tag) {
    case ManifoldTag::Point: return single_patch_nerve();
    case ManifoldTag::Circle: return circle_nerve();
    case ManifoldTag::Sphere2: return sphere_nerve();
    case ManifoldTag::Torus2: return product_nerve(circle_nerve(), circle_nerve());
    case ManifoldTag::CircleTimesSphere2: return product_nerve(circle_nerve(), sphere_nerve());
    case ManifoldTag::Torus3:
      return product_nerve(product_nerve(circle_nerve(), circle_nerve()), circle_nerve());
  }
  throw StructuralError("unknown manifold tag");
}

std::array<double, 3> sphere_vertex_direction(FactorKind kind, int v) {
  if (kind == FactorKind::Tetra) {
    static const double s = 1.0 / std::sqrt(3.0);
    static const double d[4][3] = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
    return {d[v][0], d[v][1], d[v][2]};
  }
  if (kind == FactorKind::Octa) {
    std::array<double, 3> y{0, 0, 0};
    y[v / 2] = (v % 2) ? -1.0 : 1.0;
    return y;
  }
  throw StructuralError("factor is not a sphere cover");
}

RealizedPoint witness_point(const Nerve& n, int maximal_index) {
  const auto& s = n.maximal()[maximal_index];
  RealizedPoint p;
  for (std::size_t f = 0; f < n.factors.size(); ++f) {
    auto kind = n.factors[f];
    if (kind == FactorKind::Circle3) {
      bool has0 = false, has2 = false;
      for (int v : s) {
        int a = n.factor_vertex[v][f];
        has0 |= (a == 0);
        has2 |= (a == 2);
      }
      double x = 0;
      for (int v : s) {
        int a = n.factor_vertex[v][f];
        x += (a == 0 && has2 ? 3 : a) / 3.0;
      }
      p.circle.push_back(x / s.size());
    } else if (kind == FactorKind::Tetra || kind == FactorKind::Octa) {
      std::array<double, 3> y{0, 0, 0};
      for (int v : s) {
        auto d = sphere_vertex_direction(kind, n.factor_vertex[v][f]);
        for (int c = 0; c < 3; ++c) y[c] += d[c];
      }
      double r = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
      for (auto& c : y) c /= r;
      p.sphere.push_back(y);
    }
  }
  return p;
}

int sample_of(const Nerve& n, int k, int i, int maximal_index) {
  const auto& w = n.witnesses(k, i);
  for (std::size_t s = 0; s < w.size(); ++s)
    if (w[s] == maximal_index) return static_cast<int>(s);
  throw StructuralError("maximal simplex does not contain the given simplex");
}

CechCochain CechCochain::zero(const Nerve& n, int degree, Coefficients c) {
  if (degree > n.top_degree()) throw StructuralError("nerve has no simplices in degree " + std::to_string(degree));
  CechCochain z;
  z.degree = degree;
  z.coefficients = c;
  z.values.resize(n.count(degree));
  for (int i = 0; i < n.count(degree); ++i) z.values[i].assign(n.witness_count(degree, i), 0.0);
  return z;
}

CechCochain CechCochain::constant(const Nerve& n, int degree, Coefficients c,
                                  const std::vector<double>& per_simplex) {
  auto z = zero(n, degree, c);
  if (static_cast<int>(per_simplex.size()) != n.count(degree))
    throw StructuralError("value count does not match simplex count");
  for (int i = 0; i < n.count(degree); ++i)
    std::fill(z.values[i].begin(), z.values[i].end(), per_simplex[i]);
  return z;
}

double CechCochain::circle_value(int simplex, int sample) const {
  double v = values[simplex][sample];
  return v - std::floor(v);
}

std::int64_t CechCochain::integer_value(int simplex) const {
  return static_cast<std::int64_t>(std::llround(values[simplex][0]));
}

IntVector CechCochain::integer_vector() const {
  IntVector v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) v[i] = integer_value(static_cast<int>(i));
  return v;
}

CechCochain coboundary(const CechCochain& c, const Nerve& n) {
  int k = c.degree;
  if (k + 1 > n.top_degree()) throw StructuralError("coboundary target degree has no simplices");
  if (static_cast<int>(c.values.size()) != n.count(k)) throw StructuralError("cochain does not live on nerve");
  auto r = CechCochain::zero(n, k + 1, c.coefficients);
  for (int i = 0; i < n.count(k + 1); ++i) {
    const auto& s = n.simplices[k + 1][i];
    const auto& w = n.witnesses(k + 1, i);
    for (std::size_t d = 0; d < s.size(); ++d) {
      int fi = n.index_of(face(s, d));
      double sign = (d % 2) ? -1.0 : 1.0;
      for (std::size_t m = 0; m < w.size(); ++m)
        r.values[i][m] += sign * c.values[fi][sample_of(n, k, fi, w[m])];
    }
  }
  return r;
}

CechCochain cup(const CechCochain& p, const CechCochain& q, const Nerve& n) {
  using C = Coefficients;
  C out;
  if (p.coefficients == C::Circle && q.coefficients == C::Circle)
    throw std::invalid_argument("cup of two circle-valued cochains is not defined");
  if (p.coefficients == C::Circle || q.coefficients == C::Circle) {
    if (p.coefficients == C::Real || q.coefficients == C::Real)
      throw std::invalid_argument("cup pairs circle coefficients only with integers");
    out = C::Circle;
  } else if (p.coefficients == C::Real || q.coefficients == C::Real) {
    out = C::Real;
  } else {
    out = C::Integer;
  }
  int deg = p.degree + q.degree;
  auto r = CechCochain::zero(n, deg, out);
  for (int i = 0; i < n.count(deg); ++i) {
    const auto& s = n.simplices[deg][i];
    Simplex front(s.begin(), s.begin() + p.degree + 1);
    Simplex back(s.begin() + p.degree, s.end());
    int fi = n.index_of(front), bi = n.index_of(back);
    const auto& w = n.witnesses(deg, i);
    for (std::size_t m = 0; m < w.size(); ++m)
      r.values[i][m] = p.values[fi][sample_of(n, p.degree, fi, w[m])] *
                       q.values[bi][sample_of(n, q.degree, bi, w[m])];
  }
  return r;
}

CechCochain add(const CechCochain& a, const CechCochain& b) {
  if (a.degree != b.degree || a.coefficients != b.coefficients || a.values.size() != b.values.size())
    throw StructuralError("adding incompatible cochains");
  auto r = a;
  for (std::size_t i = 0; i < r.values.size(); ++i)
    for (std::size_t m = 0; m < r.values[i].size(); ++m) r.values[i][m] += b.values[i][m];
  return r;
}

CechCochain scale(const CechCochain& a, double s) {
  auto r = a;
  for (auto& v : r.values)
    for (auto& x : v) x *= s;
  return r;
}

double cocycle_defect(const CechCochain& c, const Nerve& n, int* worst_simplex) {
  if (c.degree + 1 > n.top_degree()) return 0.0;
  auto dc = coboundary(c, n);
  double worst = 0;
  for (std::size_t i = 0; i < dc.values.size(); ++i)
    for (double v : dc.values[i]) {
      double e = c.coefficients == Coefficients::Circle ? std::abs(v - std::round(v)) : std::abs(v);
      if (e > worst) {
        worst = e;
        if (worst_simplex) *worst_simplex = static_cast<int>(i);
      }
    }
  return worst;
}

bool is_cocycle(const CechCochain& c, const Nerve& n, double tol) { return cocycle_defect(c, n) <= tol; }

IntMatrix coboundary_matrix(const Nerve& n, int k) {
  IntMatrix m = IntMatrix::Zero(n.count(k + 1), n.count(k));
  for (int i = 0; i < n.count(k + 1); ++i) {
    const auto& s = n.simplices[k + 1][i];
    for (std::size_t d = 0; d < s.size(); ++d) m(i, n.index_of(face(s, d))) += (d % 2) ? -1 : 1;
  }
  return m;
}

SmithForm smith_normal_form(const IntMatrix& a_in) {
  IntMatrix A = a_in;
  const int rows = static_cast<int>(A.rows()), cols = static_cast<int>(A.cols());
  SmithForm sf;
  sf.U = IntMatrix::Identity(rows, rows);
  sf.V = IntMatrix::Identity(cols, cols);
  sf.Vinv = IntMatrix::Identity(cols, cols);

  auto row_axpy = [&](int dst, int src, std::int64_t q) {  // row dst -= q row src
    for (int c = 0; c < cols; ++c) A(dst, c) = checked((__int128)A(dst, c) - (__int128)q * A(src, c));
    for (int c = 0; c < rows; ++c) sf.U(dst, c) = checked((__int128)sf.U(dst, c) - (__int128)q * sf.U(src, c));
  };
  auto col_axpy = [&](int dst, int src, std::int64_t q) {  // col dst -= q col src
    for (int r = 0; r < rows; ++r) A(r, dst) = checked((__int128)A(r, dst) - (__int128)q * A(r, src));
    for (int r = 0; r < cols; ++r) sf.V(r, dst) = checked((__int128)sf.V(r, dst) - (__int128)q * sf.V(r, src));
    for (int c = 0; c < cols; ++c)
      sf.Vinv(src, c) = checked((__int128)sf.Vinv(src, c) + (__int128)q * sf.Vinv(dst, c));
  };
  auto swap_rows = [&](int r1, int r2) {
    if (r1 == r2) return;
    A.row(r1).swap(A.row(r2));
    sf.U.row(r1).swap(sf.U.row(r2));
  };
  auto swap_cols = [&](int c1, int c2) {
    if (c1 == c2) return;
    A.col(c1).swap(A.col(c2));
    sf.V.col(c1).swap(sf.V.col(c2));
    sf.Vinv.row(c1).swap(sf.Vinv.row(c2));
  };

  for (int t = 0; t < std::min(rows, cols); ++t) {
    for (;;) {
      int pr = -1, pc = -1;
      std::int64_t best = 0;
      for (int r = t; r < rows; ++r)
        for (int c = t; c < cols; ++c)
          if (A(r, c) != 0 && (best == 0 || std::llabs(A(r, c)) < best)) {
            best = std::llabs(A(r, c));
            pr = r;
            pc = c;
          }
      if (pr < 0) goto done;
      swap_rows(t, pr);
      swap_cols(t, pc);
      bool clean = true;
      for (int r = t + 1; r < rows; ++r)
        if (A(r, t) != 0) {
          row_axpy(r, t, A(r, t) / A(t, t));
          if (A(r, t) != 0) clean = false;
        }
      for (int c = t + 1; c < cols; ++c)
        if (A(t, c) != 0) {
          col_axpy(c, t, A(t, c) / A(t, t));
          if (A(t, c) != 0) clean = false;
        }
      if (!clean) continue;
      // divisibility of the remaining block by the pivot
      int bad = -1;
      for (int r = t + 1; r < rows && bad < 0; ++r)
        for (int c = t + 1; c < cols; ++c)
          if (A(r, c) % A(t, t) != 0) {
            bad = r;
            break;
          }
      if (bad < 0) break;
      row_axpy(t, bad, -1);
    }
    if (A(t, t) < 0) {
      A.row(t) *= -1;
      sf.U.row(t) *= -1;
    }
    sf.diagonal.push_back(A(t, t));
  }
done:
  return sf;
}

namespace {

struct CohomologyBasis {
  int kernel_rank_offset = 0;  // r: rank of delta_k
  SmithForm ker;               // SNF of delta_k
  SmithForm img;               // SNF of image expressed in kernel coordinates
  int m = 0;                   // kernel dimension
};

CohomologyBasis integer_basis(const Nerve& n, int k) {
  CohomologyBasis b;
  int nk = n.count(k);
  IntMatrix dk = (k + 1 <= n.top_degree()) ? coboundary_matrix(n, k) : IntMatrix::Zero(0, nk);
  b.ker = smith_normal_form(dk);
  int r = static_cast<int>(b.ker.diagonal.size());
  b.kernel_rank_offset = r;
  b.m = nk - r;
  IntMatrix dprev = (k >= 1) ? coboundary_matrix(n, k - 1) : IntMatrix::Zero(nk, 0);
  IntMatrix coords = (b.ker.Vinv * dprev).bottomRows(b.m);
  b.img = smith_normal_form(coords);
  return b;
}

}  // namespace

CohomologyGroup cohomology(const Nerve& n, int k, Coefficients coeff) {
  if (n.vertex_count == 0) throw StructuralError("empty nerve");
  if (k < 0) throw StructuralError("negative degree");
  if (k > n.top_degree()) return {};
  if (coeff == Coefficients::Real) {
    auto rank = [&](int deg) -> int {
      if (deg < 0 || deg + 1 > n.top_degree()) return 0;
      Eigen::MatrixXd m = coboundary_matrix(n, deg).cast<double>();
      return static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(m).rank());
    };
    return {n.count(k) - rank(k) - rank(k - 1), {}};
  }
  if (coeff == Coefficients::Circle) {
    // H^k(X; R/Z) = Hom(H_k, R/Z): a torus of rank b_k times the dual of tors H_k = tors H^{k+1}
    CohomologyGroup g;
    g.free_rank = cohomology(n, k, Coefficients::Integer).free_rank;
    if (k + 1 <= n.top_degree()) g.torsion = cohomology(n, k + 1, Coefficients::Integer).torsion;
    return g;
  }
  auto b = integer_basis(n, k);
  CohomologyGroup g;
  int s = static_cast<int>(b.img.diagonal.size());
  g.free_rank = b.m - s;
  for (auto d : b.img.diagonal)
    if (d > 1) g.torsion.push_back(d);
  return g;
}

IntVector class_coordinates(const CechCochain& z, const Nerve& n) {
  if (z.coefficients != Coefficients::Integer) throw ValidationError("class_coordinates needs an integer cochain");
  int worst = -1;
  if (cocycle_defect(z, n, &worst) > 0.5)
    throw ValidationError("cochain is not a cocycle at " + simplex_key(n.simplices[z.degree + 1][worst]));
  auto b = integer_basis(n, z.degree);
  IntVector c = (b.ker.Vinv * z.integer_vector()).bottomRows(b.m);
  IntVector y = b.img.U * c;
  int s = static_cast<int>(b.img.diagonal.size());
  return y.tail(b.m - s);
}

IntVector fundamental_cycle(const Nerve& n) {
  int top = n.top_degree();
  IntMatrix boundary = coboundary_matrix(n, top - 1).transpose();
  auto sf = smith_normal_form(boundary);
  int r = static_cast<int>(sf.diagonal.size());
  if (n.count(top) - r != 1) throw StructuralError("nerve top homology is not of rank one");
  IntVector z = sf.V.col(n.count(top) - 1);
  return z;
}

std::int64_t pair_with_cycle(const CechCochain& z, const IntVector& cycle) {
  return z.integer_vector().dot(cycle);
}

void CircleValuedMap::validate(const Nerve& n) const {
  if (static_cast<int>(local_lifts.size()) != n.vertex_count) throw ValidationError("lift count differs from patch count");
  int bad = -1;
  if (cocycle_defect(transitions, n, &bad) != 0.0)
    throw ValidationError("transition cochain is not a cocycle at " + simplex_key(n.simplices[2][bad]));
  for (int e = 0; e < n.count(1); ++e) {
    const auto& s = n.simplices[1][e];
    for (std::size_t m = 0; m < n.witnesses(1, e).size(); ++m) {
      int mi = n.witnesses(1, e)[m];
      const Rational& fj = local_lifts[s[0]][sample_of(n, 0, s[0], mi)];
      const Rational& fk = local_lifts[s[1]][sample_of(n, 0, s[1], mi)];
      if (fj - fk != Rational(static_cast<long long>(transitions.values[e][m])) ||
          transitions.values[e][m] != std::round(transitions.values[e][m]))
        throw ValidationError("lift difference is not the declared integer on overlap " + simplex_key(s));
    }
  }
}

Rational witness_circle_coordinate(const Nerve& n, int maximal_index) {
  const auto& s = n.maximal()[maximal_index];
  for (std::size_t f = 0; f < n.factors.size(); ++f) {
    if (n.factors[f] != FactorKind::Circle3) continue;
    bool has2 = false;
    for (int v : s) has2 |= (n.factor_vertex[v][f] == 2);
    Rational x(0);
    for (int v : s) {
      int a = n.factor_vertex[v][f];
      x += Rational(a == 0 && has2 ? 3 : a, 3);
    }
    return x / static_cast<int>(s.size());
  }
  return Rational(0);
}

CircleValuedMap winding_map(const Nerve& n, int winding) {
  int cf = -1;
  for (std::size_t f = 0; f < n.factors.size(); ++f)
    if (n.factors[f] == FactorKind::Circle3) {
      cf = static_cast<int>(f);
      break;
    }
  CircleValuedMap u;
  u.local_lifts.resize(n.vertex_count);
  for (int j = 0; j < n.vertex_count; ++j) {
    const auto& w = n.witnesses(0, j);
    u.local_lifts[j].assign(w.size(), Rational(0));
    if (cf < 0) continue;
    Rational centre(n.factor_vertex[j][cf], 3);
    for (std::size_t m = 0; m < w.size(); ++m) {
      Rational x = witness_circle_coordinate(n, w[m]);
      // representative of x in the arc of patch j
      Rational t = x - centre + Rational(1, 2);
      auto fl = boost::multiprecision::numerator(t) / boost::multiprecision::denominator(t);
      if (t < 0 && Rational(fl) != t) fl -= 1;
      u.local_lifts[j][m] = winding * (x - Rational(fl));
    }
  }
  u.transitions = CechCochain::zero(n, 1, Coefficients::Integer);
  for (int e = 0; e < n.count(1); ++e) {
    const auto& s = n.simplices[1][e];
    const auto& w = n.witnesses(1, e);
    for (std::size_t m = 0; m < w.size(); ++m) {
      Rational d = u.local_lifts[s[0]][sample_of(n, 0, s[0], w[m])] -
                   u.local_lifts[s[1]][sample_of(n, 0, s[1], w[m])];
      u.transitions.values[e][m] = static_cast<double>(d);
    }
  }
  u.validate(n);
  return u;
}

CircleValuedMap rebranch(const CircleValuedMap& u, const Nerve& n, int patch, int shift) {
  auto r = u;
  for (auto& v : r.local_lifts[patch]) v += Rational(shift);
  for (int e = 0; e < n.count(1); ++e) {
    const auto& s = n.simplices[1][e];
    for (auto& v : r.transitions.values[e]) {
      if (s[0] == patch) v += shift;
      if (s[1] == patch) v -= shift;
    }
  }
  r.validate(n);
  return r;
}

namespace {

using cplx = std::complex<double>;
using Spinor = std::array<cplx, 2>;

Spinor spinor_of(const std::array<double, 3>& y) {
  double th = std::acos(std::clamp(y[2], -1.0, 1.0));
  double ph = std::atan2(y[1], y[0]);
  return {cplx(std::cos(th / 2), 0), std::polar(std::sin(th / 2), ph)};
}

// <tau_j, tau_k> up to a positive factor, where tau_j = P_y w_j / |P_y w_j|
cplx section_overlap(const Spinor& wj, const Spinor& wk, const std::array<double, 3>& y) {
  cplx m00(1 + y[2], 0), m01(y[0], -y[1]), m10(y[0], y[1]), m11(1 - y[2], 0);
  cplx p0 = m00 * wk[0] + m01 * wk[1];
  cplx p1 = m10 * wk[0] + m11 * wk[1];
  return std::conj(wj[0]) * p0 + std::conj(wj[1]) * p1;
}

double continuous_phase(const Spinor& wj, const Spinor& wk, const std::array<double, 3>& from,
                        const std::array<double, 3>& to) {
  const int steps = 256;
  double acc = std::arg(section_overlap(wj, wk, from)) / kTwoPi;
  double prev = acc;
  for (int s = 1; s <= steps; ++s) {
    double t = static_cast<double>(s) / steps;
    std::array<double, 3> y;
    for (int c = 0; c < 3; ++c) y[c] = (1 - t) * from[c] + t * to[c];
    double r = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    for (auto& c : y) c /= r;
    double ph = std::arg(section_overlap(wj, wk, y)) / kTwoPi;
    double step = ph - prev;
    step -= std::round(step);
    acc += step;
    prev = ph;
  }
  return acc;
}

}  // namespace

CechCochain sphere_line_bundle_cocycle(const Nerve& n, int degree) {
  int sf = -1;
  for (std::size_t f = 0; f < n.factors.size(); ++f)
    if (n.factors[f] == FactorKind::Tetra || n.factors[f] == FactorKind::Octa) sf = static_cast<int>(f);
  auto c = CechCochain::zero(n, 1, Coefficients::Circle);
  if (sf < 0 || degree == 0) return c;
  auto kind = n.factors[sf];
  int sphere_slot = 0;
  for (int f = 0; f < sf; ++f)
    if (n.factors[f] == FactorKind::Tetra || n.factors[f] == FactorKind::Octa) ++sphere_slot;
  for (int e = 0; e < n.count(1); ++e) {
    const auto& s = n.simplices[1][e];
    int b = n.factor_vertex[s[0]][sf], bp = n.factor_vertex[s[1]][sf];
    if (b == bp) continue;
    auto yb = sphere_vertex_direction(kind, b), ybp = sphere_vertex_direction(kind, bp);
    std::array<double, 3> mid;
    for (int q = 0; q < 3; ++q) mid[q] = yb[q] + ybp[q];
    auto wb = spinor_of(yb), wbp = spinor_of(ybp);
    const auto& w = n.witnesses(1, e);
    for (std::size_t m = 0; m < w.size(); ++m) {
      auto y = witness_point(n, w[m]).sphere[sphere_slot];
      c.values[e][m] = degree * continuous_phase(wb, wbp, mid, y);
    }
  }
  return c;
}

CechCochain twist_by_coboundary(const CechCochain& c, const Nerve& n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<std::array<double, 5>> coef(n.vertex_count);
  for (auto& a : coef)
    for (auto& x : a) x = U(rng);
  auto g = [&](int j, const RealizedPoint& p) {
    const auto& a = coef[j];
    double v = a[0];
    if (!p.circle.empty()) v += a[1] * std::sin(kTwoPi * p.circle[0] + a[2]);
    if (!p.sphere.empty()) v += a[3] * p.sphere[0][0] + a[4] * p.sphere[0][2];
    return v;
  };
  auto r = c;
  for (int e = 0; e < n.count(1); ++e) {
    const auto& s = n.simplices[1][e];
    const auto& w = n.witnesses(1, e);
    for (std::size_t m = 0; m < w.size(); ++m) {
      auto p = witness_point(n, w[m]);
      r.values[e][m] += g(s[1], p) - g(s[0], p);
    }
  }
  return r;
}

CechCochain dd_cocycle(const CircleValuedMap& u, const CechCochain& c, const Nerve& n) {
  if (c.coefficients != Coefficients::Circle || c.degree != 1)
    throw ValidationError("dd_cocycle needs a circle-valued 1-cochain");
  int bad = -1;
  if (cocycle_defect(c, n, &bad) > 1e-9)
    throw ValidationError("line bundle cochain is not a cocycle at " + simplex_key(n.simplices[2][bad]));
  u.validate(n);
  // d_ijk = -n_ji theta_kj = -n_ij theta_jk
  auto d = CechCochain::zero(n, 2, Coefficients::Circle);
  for (int t = 0; t < n.count(2); ++t) {
    const auto& s = n.simplices[2][t];
    int ij = n.index_of({s[0], s[1]}), jk = n.index_of({s[1], s[2]});
    const auto& w = n.witnesses(2, t);
    for (std::size_t m = 0; m < w.size(); ++m)
      d.values[t][m] = -u.transitions.values[ij][sample_of(n, 1, ij, w[m])] *
                       c.values[jk][sample_of(n, 1, jk, w[m])];
  }
  return d;
}

CechCochain bockstein(const CechCochain& d, const Nerve& n) {
  if (d.coefficients != Coefficients::Circle) throw ValidationError("bockstein needs a circle cochain");
  int bad = -1;
  if (cocycle_defect(d, n, &bad) > 1e-9)
    throw ValidationError("bockstein input is not a cocycle at " + simplex_key(n.simplices[d.degree + 1][bad]));
  auto r = coboundary(d, n);
  r.coefficients = Coefficients::Integer;
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    double v0 = std::round(r.values[i][0]);
    for (auto& v : r.values[i]) {
      if (std::abs(v - v0) > 1e-6)
        throw ValidationError("lift of bockstein input is not continuous on " +
                              simplex_key(n.simplices[d.degree + 1][i]));
      v = v0;
    }
  }
  return r;
}

nlohmann::json to_json(const Nerve& n, const std::vector<CechCochain>& cochains) {
  nlohmann::json j;
  j["vertices"] = n.vertex_count;
  j["manifold"] = to_string(n.manifold_tag);
  for (int k = 1; k <= n.top_degree(); ++k) j["simplices"][std::to_string(k)] = n.simplices[k];
  j["cochains"] = nlohmann::json::array();
  for (const auto& c : cochains) {
    nlohmann::json cj{{"degree", c.degree}, {"coeff", to_string(c.coefficients)}};
    nlohmann::json vals = nlohmann::json::object();
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      auto key = simplex_key(n.simplices[c.degree][i]);
      if (c.coefficients == Coefficients::Integer) {
        vals[key] = c.integer_value(static_cast<int>(i));
      } else {
        nlohmann::json samples = nlohmann::json::array();
        for (std::size_t m = 0; m < c.values[i].size(); ++m) {
          double v = c.coefficients == Coefficients::Circle ? c.circle_value(static_cast<int>(i), static_cast<int>(m))
                                                            : c.values[i][m];
          std::ostringstream os;
          os.precision(17);
          os << v;
          samples.push_back(os.str());
        }
        vals[key] = samples;
      }
    }
    cj["values"] = vals;
    j["cochains"].push_back(cj);
  }
  return j;
}

}  // namespace tk
