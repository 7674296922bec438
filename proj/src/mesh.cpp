#include "tk/mesh.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace tk {

namespace {

constexpr int kMaxFactors = 6;

struct LatticeBuilder {
  int n = 0;
  double h = 0;
  std::map<long, int> vmap, emap, smap;
  Factor f;

  long key(const std::array<int, 3>& q) const { return (static_cast<long>(q[0]) * (n + 1) + q[1]) * (n + 1) + q[2]; }

  int vertex(std::array<int, 3> q) {
    auto [it, fresh] = vmap.emplace(key(q), static_cast<int>(f.cells[0].size()));
    if (fresh) {
      FactorCell c;
      for (int i = 0; i < 3; ++i) c.lower[i] = -1.0 + h * q[i];
      f.cells[0].push_back(c);
    }
    return it->second;
  }
  int edge(std::array<int, 3> q, int a) {
    auto [it, fresh] = emap.emplace(key(q) * 3 + a, static_cast<int>(f.cells[1].size()));
    if (fresh) {
      FactorCell c;
      for (int i = 0; i < 3; ++i) c.lower[i] = -1.0 + h * q[i];
      c.axes = {a};
      c.h = {h};
      auto q1 = q;
      ++q1[a];
      int lo = vertex(q), hi = vertex(q1);
      c.faces = {{lo, hi}};
      f.cells[1].push_back(c);
    }
    return it->second;
  }
  void square(std::array<int, 3> q, int a, int b) {
    int c3 = 3 - a - b;
    auto [it, fresh] = smap.emplace(key(q) * 3 + c3, static_cast<int>(f.cells[2].size()));
    if (!fresh) return;
    FactorCell c;
    for (int i = 0; i < 3; ++i) c.lower[i] = -1.0 + h * q[i];
    c.axes = {a, b};
    c.h = {h, h};
    auto qa = q, qb = q;
    ++qa[a];
    ++qb[b];
    std::array<int, 2> f0{edge(q, b), edge(qa, b)};
    std::array<int, 2> f1{edge(q, a), edge(qb, a)};
    c.faces = {f0, f1};
    f.cells[2].push_back(c);
  }
};

void add_face(LatticeBuilder& lb, int axis, int sign) {
  int a = axis == 0 ? 1 : 0, b = axis == 2 ? 1 : 2;
  for (int i = 0; i < lb.n; ++i)
    for (int j = 0; j < lb.n; ++j) {
      std::array<int, 3> q{};
      q[axis] = sign > 0 ? lb.n : 0;
      q[a] = i;
      q[b] = j;
      lb.square(q, a, b);
    }
}

int permutation_sign3(int c, int a, int b) {
  int p[3] = {c, a, b};
  int s = 1;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (p[i] > p[j]) s = -s;
  return s;
}

}  // namespace

Factor circle_grid(int m, std::string name) {
  if (m < 3) throw std::invalid_argument("circle grid needs at least 3 points");
  Factor f;
  f.type = FactorType::Circle;
  f.name = std::move(name);
  f.param_dim = 1;
  f.cells.resize(2);
  double h = 1.0 / m;
  for (int i = 0; i < m; ++i) {
    FactorCell v;
    v.lower[0] = i * h;
    f.cells[0].push_back(v);
  }
  for (int i = 0; i < m; ++i) {
    FactorCell e;
    e.lower[0] = i * h;
    e.axes = {0};
    e.h = {h};
    e.faces = {{i, (i + 1) % m}};
    f.cells[1].push_back(e);
  }
  return f;
}

Factor interval_grid(int n, double a, double b, std::string name) {
  if (n < 1 || !(b > a)) throw std::invalid_argument("bad interval grid");
  Factor f;
  f.type = FactorType::Interval;
  f.name = std::move(name);
  f.param_dim = 1;
  f.cells.resize(2);
  double h = (b - a) / n;
  for (int i = 0; i <= n; ++i) {
    FactorCell v;
    v.lower[0] = a + i * h;
    f.cells[0].push_back(v);
  }
  for (int i = 0; i < n; ++i) {
    FactorCell e;
    e.lower[0] = a + i * h;
    e.axes = {0};
    e.h = {h};
    e.faces = {{i, i + 1}};
    f.cells[1].push_back(e);
  }
  return f;
}

Factor cube_sphere(int n) {
  if (n < 1) throw std::invalid_argument("cube sphere needs n >= 1");
  LatticeBuilder lb;
  lb.n = n;
  lb.h = 2.0 / n;
  lb.f.type = FactorType::Lattice;
  lb.f.name = "sphere";
  lb.f.param_dim = 3;
  lb.f.cells.resize(3);
  for (int axis = 0; axis < 3; ++axis)
    for (int sign : {-1, 1}) add_face(lb, axis, sign);
  return lb.f;
}

Factor face_patch(int n, int normal_axis, int normal_sign) {
  LatticeBuilder lb;
  lb.n = n;
  lb.h = 2.0 / n;
  lb.f.type = FactorType::Lattice;
  lb.f.name = "face";
  lb.f.param_dim = 3;
  lb.f.cells.resize(3);
  add_face(lb, normal_axis, normal_sign);
  return lb.f;
}

std::vector<int> top_orientation(const Factor& f) {
  int k = f.dim();
  std::vector<int> o(f.count(k), 1);
  if (f.type != FactorType::Lattice) return o;
  for (int i = 0; i < f.count(k); ++i) {
    const auto& c = f.cells[k][i];
    int a = c.axes[0], b = c.axes[1], n = 3 - a - b;
    int s = c.lower[n] > 0 ? 1 : -1;
    o[i] = s * permutation_sign3(n, a, b);
  }
  return o;
}

// ---------------------------------------------------------------------------

ProductMesh::ProductMesh(std::vector<Factor> factors) : factors_(std::move(factors)) {
  if (factors_.empty() || static_cast<int>(factors_.size()) > kMaxFactors)
    throw std::invalid_argument("product mesh needs 1..6 factors");
  int F = factor_count();
  for (const auto& f : factors_) {
    param_offset_.push_back(param_dim_);
    param_dim_ += f.param_dim;
    dim_ += f.dim();
  }
  blocks_.assign(dim_ + 1, {});
  total_.assign(dim_ + 1, 0);
  int codes = 1;
  for (const auto& f : factors_) codes *= f.dim() + 1;
  block_lookup_.assign(dim_ + 1, std::vector<int>(codes, -1));
  std::vector<int> deg(F, 0);
  for (int c = 0; c < codes; ++c) {
    int r = c;
    for (int f = F - 1; f >= 0; --f) {
      deg[f] = r % (factors_[f].dim() + 1);
      r /= factors_[f].dim() + 1;
    }
    int k = 0;
    for (int x : deg) k += x;
    Block b;
    b.deg = deg;
    b.stride.assign(F, 1);
    b.size = 1;
    for (int f = F - 1; f >= 0; --f) {
      b.stride[f] = b.size;
      b.size *= factors_[f].count(deg[f]);
    }
    b.offset = total_[k];
    total_[k] += b.size;
    block_lookup_[k][c] = static_cast<int>(blocks_[k].size());
    blocks_[k].push_back(b);
  }

  sub_.resize(F);
  for (int f = 0; f < F; ++f) {
    const auto& fc = factors_[f];
    sub_[f].resize(fc.dim() + 1);
    for (int k = 0; k <= fc.dim(); ++k) {
      sub_[f][k].resize(fc.count(k));
      for (int i = 0; i < fc.count(k); ++i) {
        auto& t = sub_[f][k][i];
        t.assign(16, -1);
        for (int mask = 0; mask < (1 << k); ++mask) {
          std::vector<int> pos;
          for (int p = 0; p < k; ++p)
            if (mask & (1 << p)) pos.push_back(p);
          for (int ends = 0; ends < (1 << pos.size()); ++ends) {
            int cur = i, ck = k;
            for (int t2 = static_cast<int>(pos.size()) - 1; t2 >= 0; --t2) {
              cur = fc.cells[ck][cur].faces[pos[t2]][(ends >> t2) & 1];
              --ck;
            }
            t[mask * 4 + ends] = cur;
          }
        }
      }
    }
  }
}

int ProductMesh::code(const std::vector<int>& deg) const {
  int c = 0;
  for (int f = 0; f < factor_count(); ++f) c = c * (factors_[f].dim() + 1) + deg[f];
  return c;
}

int ProductMesh::block_of(int k, const std::vector<int>& deg) const {
  for (int f = 0; f < factor_count(); ++f)
    if (deg[f] < 0 || deg[f] > factors_[f].dim()) return -1;
  return block_lookup_[k][code(deg)];
}

int ProductMesh::block_of(int k, const int* deg) const {
  int c = 0;
  for (int f = 0; f < factor_count(); ++f) {
    if (deg[f] < 0 || deg[f] > factors_[f].dim()) return -1;
    c = c * (factors_[f].dim() + 1) + deg[f];
  }
  return block_lookup_[k][c];
}

int ProductMesh::encode_in_block(int k, int b, const int* idx) const {
  const auto& B = blocks_[k][b];
  int g = B.offset;
  for (int f = 0; f < factor_count(); ++f) g += idx[f] * B.stride[f];
  return g;
}

ProductMesh::Cell ProductMesh::decode(int k, int global) const {
  const auto& bl = blocks_[k];
  auto it = std::upper_bound(bl.begin(), bl.end(), global,
                             [](int g, const Block& b) { return g < b.offset; });
  const Block& b = *(it - 1);
  Cell c;
  c.deg = b.deg;
  c.idx.resize(factor_count());
  int r = global - b.offset;
  for (int f = 0; f < factor_count(); ++f) {
    c.idx[f] = r / b.stride[f];
    r %= b.stride[f];
  }
  return c;
}

int ProductMesh::encode(const Cell& c) const {
  int k = 0;
  for (int x : c.deg) k += x;
  int b = block_of(k, c.deg);
  if (b < 0) throw std::out_of_range("cell degree outside mesh");
  return encode_in_block(k, b, c.idx.data());
}

std::vector<std::array<int, 2>> ProductMesh::directions(const Cell& c) const {
  std::vector<std::array<int, 2>> d;
  for (int f = 0; f < factor_count(); ++f)
    for (int p = 0; p < c.deg[f]; ++p) d.push_back({f, p});
  return d;
}

std::vector<int> ProductMesh::param_axes(const Cell& c) const {
  std::vector<int> a;
  for (int f = 0; f < factor_count(); ++f)
    for (int ax : factors_[f].cells[c.deg[f]][c.idx[f]].axes) a.push_back(param_offset_[f] + ax);
  return a;
}

ProductMesh::Cell ProductMesh::face(const Cell& c, int d, int e) const {
  int f = 0, p = d;
  while (p >= c.deg[f]) p -= c.deg[f++];
  Cell r = c;
  r.idx[f] = factors_[f].cells[c.deg[f]][c.idx[f]].faces[p][e];
  --r.deg[f];
  return r;
}

double ProductMesh::measure(const Cell& c) const {
  double m = 1;
  for (int f = 0; f < factor_count(); ++f)
    for (double h : factors_[f].cells[c.deg[f]][c.idx[f]].h) m *= h;
  return m;
}

void ProductMesh::geometry(const Cell& c, std::vector<double>& lower, std::vector<double>& h,
                           std::vector<int>& axes) const {
  lower.assign(param_dim_, 0.0);
  h.clear();
  axes.clear();
  for (int f = 0; f < factor_count(); ++f) {
    const auto& fc = factors_[f].cells[c.deg[f]][c.idx[f]];
    for (int i = 0; i < factors_[f].param_dim; ++i) lower[param_offset_[f] + i] = fc.lower[i];
    for (std::size_t i = 0; i < fc.axes.size(); ++i) {
      axes.push_back(param_offset_[f] + fc.axes[i]);
      h.push_back(fc.h[i]);
    }
  }
}

Eigen::VectorXd ProductMesh::top_chain() const {
  std::vector<std::vector<int>> orient;
  std::vector<int> deg;
  for (const auto& f : factors_) {
    orient.push_back(top_orientation(f));
    deg.push_back(f.dim());
  }
  Eigen::VectorXd z(total_[dim_]);
  int b = block_of(dim_, deg);
  const Block& B = blocks_[dim_][b];
  for (int g = 0; g < B.size; ++g) {
    int r = g, s = 1;
    for (int f = 0; f < factor_count(); ++f) {
      s *= orient[f][r / B.stride[f]];
      r %= B.stride[f];
    }
    z[B.offset + g] = s;
  }
  return z;
}

// ---------------------------------------------------------------------------

DiscreteForm::DiscreteForm(std::shared_ptr<const ProductMesh> mesh) : mesh_(std::move(mesh)) {
  comp_.resize(mesh_->dim() + 1);
}

Eigen::VectorXd& DiscreteForm::operator[](int k) {
  if (k < 0 || k > dim()) throw std::out_of_range("form degree outside mesh");
  if (comp_[k].size() == 0) comp_[k] = Eigen::VectorXd::Zero(mesh_->count(k));
  return comp_[k];
}

DiscreteForm DiscreteForm::homogeneous(std::shared_ptr<const ProductMesh> mesh, int degree, Eigen::VectorXd v) {
  DiscreteForm w(std::move(mesh));
  if (degree < 0 || degree > w.dim() || v.size() != w.mesh().count(degree))
    throw std::invalid_argument("cochain size does not match the mesh");
  w.comp_[degree] = std::move(v);
  return w;
}

void require_same_mesh(const DiscreteForm& a, const DiscreteForm& b) {
  if (a.mesh_ptr() != b.mesh_ptr()) throw std::invalid_argument("forms live on different meshes");
}

DiscreteForm& DiscreteForm::operator+=(const DiscreteForm& o) {
  require_same_mesh(*this, o);
  for (int k = 0; k <= dim(); ++k)
    if (o.has(k)) (*this)[k] += o.comp_[k];
  return *this;
}

DiscreteForm& DiscreteForm::operator-=(const DiscreteForm& o) {
  require_same_mesh(*this, o);
  for (int k = 0; k <= dim(); ++k)
    if (o.has(k)) (*this)[k] -= o.comp_[k];
  return *this;
}

DiscreteForm DiscreteForm::operator*(double s) const {
  auto r = *this;
  for (auto& c : r.comp_) c *= s;
  return r;
}

DiscreteForm DiscreteForm::part(int k) const {
  DiscreteForm r(mesh_);
  if (k >= 0 && k <= dim()) r.comp_[k] = comp_[k];
  return r;
}

DiscreteForm DiscreteForm::even() const {
  DiscreteForm r(mesh_);
  for (int k = 0; k <= dim(); k += 2) r.comp_[k] = comp_[k];
  return r;
}

DiscreteForm DiscreteForm::odd() const {
  DiscreteForm r(mesh_);
  for (int k = 1; k <= dim(); k += 2) r.comp_[k] = comp_[k];
  return r;
}

double DiscreteForm::max_abs() const {
  double m = 0;
  for (const auto& c : comp_)
    if (c.size()) m = std::max(m, c.cwiseAbs().maxCoeff());
  return m;
}

double DiscreteForm::density_sup() const {
  double m = 0;
  for (int k = 0; k <= dim(); ++k)
    for (int i = 0; i < comp_[k].size(); ++i)
      if (comp_[k][i] != 0.0) m = std::max(m, std::abs(comp_[k][i]) / mesh_->measure(mesh_->decode(k, i)));
  return m;
}

// ---------------------------------------------------------------------------

namespace {

// Iterates over all cells of degree k, exposing block, degrees and factor indices.
template <class Fn>
void for_each_cell(const ProductMesh& m, int k, Fn&& fn) {
  int F = m.factor_count();
  int idx[kMaxFactors];
  for (int b = 0; b < m.block_count(k); ++b) {
    const auto& deg = m.block_deg(k, b);
    int size = 1;
    for (int f = 0; f < F; ++f) size *= m.factor(f).count(deg[f]);
    for (int f = 0; f < F; ++f) idx[f] = 0;
    for (int g = 0; g < size; ++g) {
      fn(b, deg, idx, m.block_offset(k, b) + g);
      for (int f = F - 1; f >= 0; --f) {
        if (++idx[f] < m.factor(f).count(deg[f])) break;
        idx[f] = 0;
      }
    }
  }
}

// Face of a product cell after removing the directions in `mask` (bit t = t-th
// direction of the cell) at ends `ends` (bit t for direction t).
// Subface maps of one block, resolved once: face(idx) = offset + sum_f stride[f] * table[f][idx[f]][code[f]].
class BlockFaces {
 public:
  BlockFaces(const ProductMesh& m, const std::vector<int>& deg) : m_(m), deg_(deg) {
    for (int d : deg) tot_ += d;
    maps_.resize(std::size_t(1) << (2 * tot_));
  }
  int operator()(const int* idx, int mask, int ends) {
    Map& mp = maps_[(static_cast<std::size_t>(mask) << tot_) | ends];
    if (!mp.ready) resolve(mp, mask, ends);
    int g = mp.offset;
    for (int f = 0; f < nf_(); ++f) g += mp.stride[f] * (*mp.table[f])[idx[f]][mp.code[f]];
    return g;
  }

 private:
  struct Map {
    bool ready = false;
    int offset = 0;
    int stride[kMaxFactors] = {};
    int code[kMaxFactors] = {};
    const std::vector<std::vector<int>>* table[kMaxFactors] = {};
  };
  int nf_() const { return m_.factor_count(); }
  void resolve(Map& mp, int mask, int ends) {
    int F = nf_();
    int ndeg[kMaxFactors];
    int k = 0, t = 0;
    for (int f = 0; f < F; ++f) {
      int lmask = 0, lends = 0, removed = 0;
      for (int p = 0; p < deg_[f]; ++p, ++t)
        if (mask & (1 << t)) {
          lmask |= 1 << p;
          if (ends & (1 << t)) lends |= 1 << removed;
          ++removed;
        }
      ndeg[f] = deg_[f] - removed;
      mp.code[f] = lmask * 4 + lends;
      mp.table[f] = &m_.subface_table(f, deg_[f]);
      k += ndeg[f];
    }
    int b = m_.block_of(k, ndeg);
    mp.offset = m_.block_offset(k, b);
    int unit[kMaxFactors] = {};
    int base = m_.encode_in_block(k, b, unit);
    for (int f = 0; f < F; ++f) {
      unit[f] = 1;
      mp.stride[f] = m_.encode_in_block(k, b, unit) - base;
      unit[f] = 0;
    }
    mp.ready = true;
  }
  const ProductMesh& m_;
  std::vector<int> deg_;
  int tot_ = 0;
  std::vector<Map> maps_;
};

// for_each_cell with a per-block face resolver
template <class Fn>
void for_each_cell_faces(const ProductMesh& m, int k, Fn&& fn) {
  int F = m.factor_count();
  int idx[kMaxFactors];
  for (int b = 0; b < m.block_count(k); ++b) {
    const auto& deg = m.block_deg(k, b);
    BlockFaces faces(m, deg);
    int size = 1;
    for (int f = 0; f < F; ++f) size *= m.factor(f).count(deg[f]);
    for (int f = 0; f < F; ++f) idx[f] = 0;
    for (int g = 0; g < size; ++g) {
      fn(faces, idx, m.block_offset(k, b) + g);
      for (int f = F - 1; f >= 0; --f) {
        if (++idx[f] < m.factor(f).count(deg[f])) break;
        idx[f] = 0;
      }
    }
  }
}

}  // namespace

Eigen::VectorXd coboundary(const ProductMesh& m, int k, const Eigen::VectorXd& v) {
  if (v.size() != m.count(k)) throw std::invalid_argument("cochain size does not match the mesh");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m.count(k + 1));
  if (k + 1 > m.dim()) return out;
  if (!v.any()) return out;
  for_each_cell_faces(m, k + 1, [&](BlockFaces& face, const int* idx, int g) {
    double s = 0;
    for (int d = 0; d <= k; ++d) {
      double sign = (d % 2) ? -1.0 : 1.0;
      s += sign * (v[face(idx, 1 << d, 1 << d)] - v[face(idx, 1 << d, 0)]);
    }
    out[g] = s;
  });
  return out;
}

DiscreteForm d(const DiscreteForm& w) {
  DiscreteForm r(w.mesh_ptr());
  for (int k = 0; k < w.dim(); ++k)
    if (w.has(k)) r[k + 1] = coboundary(w.mesh(), k, w[k]);
  return r;
}

Eigen::VectorXd boundary(const ProductMesh& m, int k, const Eigen::VectorXd& chain) {
  if (chain.size() != m.count(k)) throw std::invalid_argument("chain size does not match the mesh");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m.count(k - 1));
  if (k < 1) return out;
  for_each_cell_faces(m, k, [&](BlockFaces& face, const int* idx, int g) {
    if (chain[g] == 0.0) return;
    for (int d = 0; d < k; ++d) {
      double sign = (d % 2) ? -1.0 : 1.0;
      out[face(idx, 1 << d, 1 << d)] += sign * chain[g];
      out[face(idx, 1 << d, 0)] -= sign * chain[g];
    }
  });
  return out;
}

Eigen::VectorXd product_chain(const ProductMesh& m, const std::vector<std::pair<int, Eigen::VectorXd>>& per_factor) {
  int F = m.factor_count();
  if (static_cast<int>(per_factor.size()) != F) throw std::invalid_argument("one chain per factor required");
  int k = 0;
  std::vector<int> deg(F);
  for (int f = 0; f < F; ++f) {
    deg[f] = per_factor[f].first;
    k += deg[f];
    if (per_factor[f].second.size() != m.factor(f).count(deg[f])) throw std::invalid_argument("factor chain size");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m.count(k));
  int b = m.block_of(k, deg);
  int idx[kMaxFactors] = {};
  int size = 1;
  for (int f = 0; f < F; ++f) size *= m.factor(f).count(deg[f]);
  for (int g = 0; g < size; ++g) {
    double v = 1;
    for (int f = 0; f < F; ++f) v *= per_factor[f].second[idx[f]];
    if (v != 0.0) out[m.encode_in_block(k, b, idx)] = v;
    for (int f = F - 1; f >= 0; --f) {
      if (++idx[f] < m.factor(f).count(deg[f])) break;
      idx[f] = 0;
    }
  }
  return out;
}

DiscreteForm wedge(const DiscreteForm& a, const DiscreteForm& b) {
  require_same_mesh(a, b);
  const auto& m = a.mesh();
  DiscreteForm r(a.mesh_ptr());
  int n = m.dim();
  for (int tot = 0; tot <= n; ++tot) {
    bool any = false;
    bool nz[8] = {};
    for (int k = 0; k <= tot; ++k) {
      nz[k] = a.has(k) && b.has(tot - k) && a[k].any() && b[tot - k].any();
      any = any || nz[k];
    }
    if (!any) continue;
    Eigen::VectorXd& out = r[tot];
    int full = (1 << tot) - 1;
    for_each_cell_faces(m, tot, [&](BlockFaces& face, const int* idx, int g) {
      double s = 0;
      for (int I = 0; I <= full; ++I) {
        int k = __builtin_popcount(I), l = tot - k;
        if (!nz[k]) continue;
        int J = full & ~I;
        // shuffle sign: pairs j in J, i in I with j < i
        int inv = 0;
        for (int i = 0; i < tot; ++i)
          if (I & (1 << i)) inv += __builtin_popcount(J & ((1 << i) - 1));
        double abar = 0, bbar = 0;
        for (int e = 0; e < (1 << tot); ++e) {
          if (e & ~J) continue;
          abar += a[k][face(idx, J, e)];
        }
        for (int e = 0; e < (1 << tot); ++e) {
          if (e & ~I) continue;
          bbar += b[l][face(idx, I, e)];
        }
        abar /= (1 << l);
        bbar /= (1 << k);
        s += ((inv % 2) ? -1.0 : 1.0) * abar * bbar;
      }
      out[g] = s;
    });
  }
  return r;
}

void gauss_legendre01(int q, std::vector<double>& x, std::vector<double>& w) {
  x.assign(q, 0.5);
  w.assign(q, 1.0);
  if (q == 1) return;
  gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(q);
  for (int i = 0; i < q; ++i) gsl_integration_glfixed_point(0.0, 1.0, i, &x[i], &w[i], t);
  gsl_integration_glfixed_table_free(t);
}

Eigen::VectorXd de_rham(const ProductMesh& m, const SmoothForm& w, int q) {
  int k = w.degree;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m.count(k));
  if (k < 0 || k > m.dim()) return out;
  std::vector<double> gx, gw;
  gauss_legendre01(q, gx, gw);
  std::vector<double> lower, h, p(m.param_dim());
  std::vector<int> axes;
  int nodes = 1;
  for (int i = 0; i < k; ++i) nodes *= q;
  for (int g = 0; g < m.count(k); ++g) {
    m.geometry(m.decode(k, g), lower, h, axes);
    double s = 0, vol = 1;
    for (double x : h) vol *= x;
    for (int node = 0; node < nodes; ++node) {
      p = lower;
      double wt = 1;
      int r = node;
      for (int i = 0; i < k; ++i) {
        int j = r % q;
        r /= q;
        p[axes[i]] += gx[j] * h[i];
        wt *= gw[j];
      }
      s += wt * w.component(p.data(), axes.data());
    }
    out[g] = s * vol;
  }
  return out;
}

DiscreteForm de_rham_form(std::shared_ptr<const ProductMesh> m, const std::vector<SmoothForm>& parts, int q) {
  DiscreteForm r(m);
  for (const auto& p : parts) r[p.degree] += de_rham(*m, p, q);
  return r;
}

DiscreteForm pullback(const DiscreteForm& w, std::shared_ptr<const ProductMesh> target,
                      const std::vector<int>& factor_map) {
  const auto& S = w.mesh();
  if (static_cast<int>(factor_map.size()) != S.factor_count())
    throw std::invalid_argument("factor map size mismatch");
  for (std::size_t i = 1; i < factor_map.size(); ++i)
    if (factor_map[i] <= factor_map[i - 1]) throw std::invalid_argument("factor map must be increasing");
  DiscreteForm r(target);
  int F = target->factor_count();
  std::vector<int> src_of(F, -1);
  for (int f = 0; f < S.factor_count(); ++f) {
    if (target->factor(factor_map[f]).count(0) != S.factor(f).count(0))
      throw std::invalid_argument("pullback factors differ");
    src_of[factor_map[f]] = f;
  }
  for (int k = 0; k <= std::min(S.dim(), target->dim()); ++k) {
    if (!w.has(k)) continue;
    Eigen::VectorXd& out = r[k];
    for_each_cell(*target, k, [&](int, const std::vector<int>& deg, const int* idx, int g) {
      std::vector<int> sdeg(S.factor_count());
      int sidx[kMaxFactors];
      for (int f = 0; f < F; ++f) {
        if (src_of[f] < 0) {
          if (deg[f] != 0) return;
        } else {
          sdeg[src_of[f]] = deg[f];
          sidx[src_of[f]] = idx[f];
        }
      }
      int b = S.block_of(k, sdeg);
      out[g] = w[k][S.encode_in_block(k, b, sidx)];
    });
  }
  return r;
}

std::vector<int> embed_cells(const Factor& sub, const Factor& full, int k) {
  auto key = [](const FactorCell& c) {
    std::array<long, 4> q{};
    for (int i = 0; i < 3; ++i) q[i] = std::lround(c.lower[i] * 1e6);
    int m = 0;
    for (int a : c.axes) m |= 1 << a;
    q[3] = m;
    return q;
  };
  std::map<std::array<long, 4>, int> index;
  for (int i = 0; i < full.count(k); ++i) index.emplace(key(full.cells[k][i]), i);
  std::vector<int> out(sub.count(k));
  for (int i = 0; i < sub.count(k); ++i) {
    auto it = index.find(key(sub.cells[k][i]));
    if (it == index.end()) throw std::invalid_argument("cell of the sub-factor is not in the full factor");
    out[i] = it->second;
  }
  return out;
}

DiscreteForm restrict_form(const DiscreteForm& w, std::shared_ptr<const ProductMesh> sub) {
  const auto& S = w.mesh();
  int F = sub->factor_count();
  if (F != S.factor_count()) throw std::invalid_argument("restriction needs matching factors");
  std::vector<std::vector<std::vector<int>>> emb(F);
  for (int f = 0; f < F; ++f)
    for (int k = 0; k <= sub->factor(f).dim(); ++k) emb[f].push_back(embed_cells(sub->factor(f), S.factor(f), k));
  DiscreteForm r(sub);
  for (int k = 0; k <= sub->dim(); ++k) {
    if (!w.has(k)) continue;
    Eigen::VectorXd& out = r[k];
    for_each_cell(*sub, k, [&](int, const std::vector<int>& deg, const int* idx, int g) {
      int sidx[kMaxFactors];
      for (int f = 0; f < F; ++f) sidx[f] = emb[f][deg[f]][idx[f]];
      out[g] = w[k][S.encode_in_block(k, S.block_of(k, deg), sidx)];
    });
  }
  return r;
}

DiscreteForm interior_fiber(const DiscreteForm& w, int fiber_factor) {
  const auto& m = w.mesh();
  if (m.factor(fiber_factor).type != FactorType::Circle) throw std::invalid_argument("fiber must be a circle");
  int M = m.factor(fiber_factor).count(0);
  DiscreteForm r(w.mesh_ptr());
  int F = m.factor_count();
  for (int k = 1; k <= m.dim(); ++k) {
    if (!w.has(k)) continue;
    Eigen::VectorXd& out = r[k - 1];
    for_each_cell(m, k - 1, [&](int, const std::vector<int>& deg, const int* idx, int g) {
      if (deg[fiber_factor] != 0) return;
      std::vector<int> d2 = deg;
      d2[fiber_factor] = 1;
      int b = m.block_of(k, d2);
      int i2[kMaxFactors];
      int p = 0;
      for (int f = 0; f < F; ++f) {
        i2[f] = idx[f];
        if (f < fiber_factor) p += deg[f];
      }
      int j = idx[fiber_factor];
      i2[fiber_factor] = j;
      double up = w[k][m.encode_in_block(k, b, i2)];
      i2[fiber_factor] = (j + M - 1) % M;
      double dn = w[k][m.encode_in_block(k, b, i2)];
      out[g] = ((p % 2) ? -1.0 : 1.0) * 0.5 * (up + dn) * M;
    });
  }
  return r;
}

DiscreteForm lie_fiber(const DiscreteForm& w, int fiber_factor) {
  const auto& m = w.mesh();
  if (m.factor(fiber_factor).type != FactorType::Circle) throw std::invalid_argument("fiber must be a circle");
  int M = m.factor(fiber_factor).count(0);
  DiscreteForm r(w.mesh_ptr());
  int F = m.factor_count();
  for (int k = 0; k <= m.dim(); ++k) {
    if (!w.has(k)) continue;
    Eigen::VectorXd& out = r[k];
    for_each_cell(m, k, [&](int b, const std::vector<int>&, const int* idx, int g) {
      int i2[kMaxFactors];
      for (int f = 0; f < F; ++f) i2[f] = idx[f];
      int j = idx[fiber_factor];
      i2[fiber_factor] = (j + 1) % M;
      double up = w[k][m.encode_in_block(k, b, i2)];
      i2[fiber_factor] = (j + M - 1) % M;
      double dn = w[k][m.encode_in_block(k, b, i2)];
      out[g] = 0.5 * (up - dn) * M;
    });
  }
  return r;
}

SmoothForm smooth_wedge(const SmoothForm& a, const SmoothForm& b) {
  int k = a.degree, l = b.degree;
  SmoothForm r;
  r.degree = k + l;
  r.component = [a, b, k, l](const double* p, const int* axes) {
    int n = k + l;
    double s = 0;
    int ia[8], ib[8];
    for (int I = 0; I < (1 << n); ++I) {
      if (__builtin_popcount(I) != k) continue;
      int na = 0, nb = 0, inv = 0;
      for (int t = 0; t < n; ++t) {
        if (I & (1 << t)) {
          ia[na++] = axes[t];
          inv += nb;
        } else {
          ib[nb++] = axes[t];
        }
      }
      double va = a.component(p, ia);
      if (va == 0.0) continue;
      s += ((inv % 2) ? -1.0 : 1.0) * va * b.component(p, ib);
    }
    return s;
  };
  return r;
}

SmoothForm smooth_sum(const SmoothForm& a, const SmoothForm& b, double sb) {
  if (a.degree != b.degree) throw std::invalid_argument("degree mismatch in smooth sum");
  return SmoothForm{a.degree, [a, b, sb](const double* p, const int* ax) {
                      return a.component(p, ax) + sb * b.component(p, ax);
                    }};
}

std::array<double, 3> sphere_point(const double* P) {
  double r = std::sqrt(P[0] * P[0] + P[1] * P[1] + P[2] * P[2]);
  return {P[0] / r, P[1] / r, P[2] / r};
}

void sphere_jacobian(const double* P, double J[3][3]) {
  double r = std::sqrt(P[0] * P[0] + P[1] * P[1] + P[2] * P[2]);
  double y[3] = {P[0] / r, P[1] / r, P[2] / r};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) J[i][j] = ((i == j ? 1.0 : 0.0) - y[i] * y[j]) / r;
}

}  // namespace tk
