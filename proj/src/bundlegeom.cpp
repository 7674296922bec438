#include "tk/bundlegeom.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace tk {

namespace {

using cd = std::complex<double>;
const cd I1(0.0, 1.0);

Eigen::Vector2cd patch_spinor(int p) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (p) {
    case 0: return {r, r};
    case 1: return {r, -r};
    case 2: return {cd(r), cd(0, r)};
    case 3: return {cd(r), cd(0, -r)};
    case 4: return {1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

// (I + y.sigma)/2 applied to w
Eigen::Vector2cd project(const double* y, const Eigen::Vector2cd& w) {
  Eigen::Matrix2cd M;
  M << 1 + y[2], cd(y[0], -y[1]), cd(y[0], y[1]), 1 - y[2];
  return 0.5 * M * w;
}

Eigen::Vector2cd sigma_dot(const double* u, const Eigen::Vector2cd& w) {
  Eigen::Matrix2cd M;
  M << u[2], cd(u[0], -u[1]), cd(u[0], u[1]), -u[2];
  return M * w;
}

double wrap_half(double v) { return v - std::round(v); }

std::vector<int> identity_map(int n) {
  std::vector<int> m(n);
  for (int i = 0; i < n; ++i) m[i] = i;
  return m;
}

}  // namespace

bool point_in_patch(int p, const double* P) {
  return std::abs(P[patch_axis(p)] - patch_sign(p)) < 1e-12;
}

Eigen::Vector2cd hopf_section(int p, const double* y) {
  Eigen::Vector2cd v = project(y, patch_spinor(p));
  double n = v.norm();
  if (n < 1e-12) throw std::domain_error("hopf section evaluated at its zero");
  return v / n;
}

double hopf_transition(int j, int k, const double* P) {
  auto y = sphere_point(P);
  cd z = project(y.data(), patch_spinor(j)).dot(project(y.data(), patch_spinor(k)));
  return std::arg(z) / (2 * M_PI);
}

void hopf_connection(int p, const double* P, double out[3]) {
  auto y = sphere_point(P);
  double J[3][3];
  sphere_jacobian(P, J);
  Eigen::Vector2cd w = patch_spinor(p);
  Eigen::Vector2cd v = project(y.data(), w);
  double n2 = v.squaredNorm();
  for (int a = 0; a < 3; ++a) {
    double u[3] = {J[0][a], J[1][a], J[2][a]};
    Eigen::Vector2cd dv = 0.5 * sigma_dot(u, w);
    out[a] = v.dot(dv).imag() / (2 * M_PI * n2);
  }
}

BaseLayout BaseLayout::of(const ProductMesh& m) {
  BaseLayout b;
  if (m.factor(0).type != FactorType::Circle) throw std::invalid_argument("base mesh must start with a circle");
  for (int f = 1; f < m.factor_count(); ++f) {
    if (m.factor(f).type == FactorType::Lattice && b.sphere_factor < 0) {
      b.sphere_factor = f;
      b.sphere_param = m.param_offset(f);
    } else if (m.factor(f).type == FactorType::Circle && b.second_circle_param < 0) {
      b.second_circle_param = m.param_offset(f);
    }
  }
  return b;
}

// ---------------------------------------------------------------------------

bool HermitianLineBundle::cell_in_patch(int k, int cell, int patch) const {
  if (layout.sphere_factor < 0) return true;
  auto c = base->decode(k, cell);
  int sf = layout.sphere_factor;
  const auto& fc = base->factor(sf).cells[c.deg[sf]][c.idx[sf]];
  int ax = patch_axis(patch);
  for (int a : fc.axes)
    if (a == ax) return false;
  return std::abs(fc.lower[ax] - patch_sign(patch)) < 1e-12;
}

int HermitianLineBundle::first_patch(int k, int cell) const {
  for (int p = 0; p < patch_count(); ++p)
    if (cell_in_patch(k, cell, p)) return p;
  throw std::logic_error("cell outside every patch");
}

double HermitianLineBundle::transition(int j, int k, const double* p) const {
  if (layout.sphere_factor < 0 || j == k) return 0.0;
  return degree * hopf_transition(j, k, p + layout.sphere_param);
}

double HermitianLineBundle::connection(int patch, const double* p, int axis) const {
  if (layout.sphere_factor < 0 || degree == 0) return 0.0;
  int a = axis - layout.sphere_param;
  if (a < 0 || a > 2) return 0.0;
  double A[3];
  hopf_connection(patch, p + layout.sphere_param, A);
  return degree * A[a];
}

SmoothForm HermitianLineBundle::connection_form(int patch, int offset) const {
  int k = degree;
  bool trivial = layout.sphere_factor < 0 || k == 0;
  return SmoothForm{1, [patch, offset, k, trivial](const double* p, const int* ax) {
                      if (trivial) return 0.0;
                      int a = ax[0] - offset;
                      if (a < 0 || a > 2) return 0.0;
                      double A[3];
                      hopf_connection(patch, p + offset, A);
                      return k * A[a];
                    }};
}

SmoothForm HermitianLineBundle::curvature_form(int offset) const {
  int k = degree;
  bool trivial = layout.sphere_factor < 0 || k == 0;
  return SmoothForm{2, [offset, k, trivial](const double* p, const int* ax) {
                      if (trivial) return 0.0;
                      int a = ax[0] - offset, b = ax[1] - offset;
                      if (a < 0 || a > 2 || b < 0 || b > 2) return 0.0;
                      double J[3][3];
                      sphere_jacobian(p + offset, J);
                      auto y = sphere_point(p + offset);
                      double u[3], v[3];
                      for (int i = 0; i < 3; ++i) {
                        u[i] = J[i][a];
                        v[i] = J[i][b];
                      }
                      double c[3] = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
                      return k * (y[0] * c[0] + y[1] * c[1] + y[2] * c[2]) / (4 * M_PI);
                    }};
}

HermitianLineBundle make_line_bundle(std::shared_ptr<const ProductMesh> base, int degree, int quadrature) {
  HermitianLineBundle L;
  L.base = base;
  L.layout = BaseLayout::of(*base);
  L.degree = L.layout.sphere_factor < 0 ? 0 : degree;
  L.quadrature = quadrature;
  int patches = L.layout.sphere_factor < 0 ? 1 : kSpherePatches;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  L.curvature = DiscreteForm(base);
  Eigen::VectorXd& beta = L.curvature[2];
  std::vector<int> owner(base->count(2));
  for (int c = 0; c < base->count(2); ++c) owner[c] = L.layout.sphere_factor < 0 ? 0 : -1;
  L.local_connection.resize(patches);
  for (int p = 0; p < patches; ++p) {
    Eigen::VectorXd A = de_rham(*base, L.connection_form(p, L.layout.sphere_param), quadrature);
    for (int e = 0; e < base->count(1); ++e)
      if (!L.cell_in_patch(1, e, p)) A[e] = 0.0;
    Eigen::VectorXd dA = coboundary(*base, 1, A);
    for (int c = 0; c < base->count(2); ++c) {
      if (owner[c] == -1 && L.cell_in_patch(2, c, p)) owner[c] = p;
      if (owner[c] == p) beta[c] = dA[c];
    }
    for (int e = 0; e < base->count(1); ++e)
      if (!L.cell_in_patch(1, e, p)) A[e] = nan;
    L.local_connection[p] = std::move(A);
  }
  return L;
}

LineBundleReport HermitianLineBundle::validate(double tol) const {
  LineBundleReport r;
  const auto& m = *base;
  std::vector<double> lo, hi, h;
  std::vector<int> axes;
  for (int e = 0; e < m.count(1); ++e) {
    auto c = m.decode(1, e);
    auto a = m.face(c, 0, 0), b = m.face(c, 0, 1);
    m.geometry(a, lo, h, axes);
    m.geometry(b, hi, h, axes);
    for (int j = 0; j < patch_count(); ++j) {
      if (std::isnan(local_connection[j][e])) continue;
      for (int k = j + 1; k < patch_count(); ++k) {
        if (std::isnan(local_connection[k][e])) continue;
        double dtheta = transition(j, k, hi.data()) - transition(j, k, lo.data());
        r.overlap_defect = std::max(r.overlap_defect,
                                    std::abs(wrap_half(local_connection[k][e] - local_connection[j][e] - dtheta)));
      }
    }
  }
  if (layout.sphere_factor >= 0) {
    int F = m.factor_count();
    int sf = layout.sphere_factor;
    Eigen::VectorXd orient = Eigen::Map<const Eigen::VectorXi>(top_orientation(m.factor(sf)).data(),
                                                               m.factor(sf).count(2)).cast<double>();
    for (int v = 0; v < m.factor(0).count(0); ++v) {
      std::vector<std::pair<int, Eigen::VectorXd>> pf;
      for (int f = 0; f < F; ++f) {
        if (f == sf) {
          pf.push_back({2, orient});
        } else {
          Eigen::VectorXd ind = Eigen::VectorXd::Zero(m.factor(f).count(0));
          ind[f == 0 ? v : 0] = 1;
          pf.push_back({0, ind});
        }
      }
      double per = product_chain(m, pf).dot(curvature[2]);
      r.periods.push_back(per);
      r.period_defect = std::max(r.period_defect, std::abs(per - std::round(per)));
    }
  }
  if (r.overlap_defect > tol) throw ValidationError("connection forms disagree on an overlap beyond tolerance");
  if (r.period_defect > 1e-6) throw ValidationError("curvature has a non-integral period");
  return r;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::pair<int, Eigen::VectorXd>> vertex_zero_chains(const ProductMesh& m, int except) {
  std::vector<std::pair<int, Eigen::VectorXd>> pf;
  for (int f = 0; f < m.factor_count(); ++f) {
    if (f == except) {
      pf.push_back({0, Eigen::VectorXd()});
      continue;
    }
    Eigen::VectorXd ind = Eigen::VectorXd::Zero(m.factor(f).count(0));
    ind[0] = 1;
    pf.push_back({0, ind});
  }
  return pf;
}

int sphere_factor_of(const ProductMesh& m) {
  for (int f = 0; f < m.factor_count(); ++f)
    if (m.factor(f).type == FactorType::Lattice) return f;
  throw std::invalid_argument("mesh has no sphere factor");
}

int lattice_n(const Factor& f) {
  const auto& e = f.cells[1].front();
  return static_cast<int>(std::lround(2.0 / e.h[0]));
}

}  // namespace

Cycle equator_cycle(const ProductMesh& m) {
  int sf = sphere_factor_of(m);
  const Factor& S = m.factor(sf);
  if (lattice_n(S) % 2) throw std::invalid_argument("equator needs an even lattice");
  Eigen::VectorXd eq = Eigen::VectorXd::Zero(S.count(1));
  for (int e = 0; e < S.count(1); ++e) {
    const auto& c = S.cells[1][e];
    if (c.axes[0] == 2 || std::abs(c.lower[2]) > 1e-12) continue;
    double mid[3] = {c.lower[0], c.lower[1], 0};
    mid[c.axes[0]] += 0.5 * c.h[0];
    double t[3] = {-mid[1], mid[0], 0};
    eq[e] = t[c.axes[0]] > 0 ? 1.0 : -1.0;
  }
  auto orient = top_orientation(S);
  Eigen::VectorXd cap = Eigen::VectorXd::Zero(S.count(2));
  for (int c = 0; c < S.count(2); ++c)
    if (S.cells[2][c].lower[2] > -1e-12) cap[c] = orient[c];
  auto pf = vertex_zero_chains(m, sf);
  Cycle z;
  z.degree = 1;
  pf[sf] = {1, eq};
  z.chain = product_chain(m, pf);
  pf[sf] = {2, cap};
  z.bounds = product_chain(m, pf);
  return z;
}

Cycle square_cycle(const ProductMesh& m, int patch, int i0, int i1, int j0, int j1) {
  int sf = sphere_factor_of(m);
  const Factor& S = m.factor(sf);
  double h = 2.0 / lattice_n(S);
  int ax = patch_axis(patch);
  int a = ax == 0 ? 1 : 0, b = ax == 2 ? 1 : 2;
  auto orient = top_orientation(S);
  Eigen::VectorXd cap = Eigen::VectorXd::Zero(S.count(2));
  for (int c = 0; c < S.count(2); ++c) {
    const auto& fc = S.cells[2][c];
    if (std::abs(fc.lower[ax] - patch_sign(patch)) > 1e-12) continue;
    int i = static_cast<int>(std::lround((fc.lower[a] + 1) / h));
    int j = static_cast<int>(std::lround((fc.lower[b] + 1) / h));
    if (i >= i0 && i < i1 && j >= j0 && j < j1) cap[c] = orient[c];
  }
  auto pf = vertex_zero_chains(m, sf);
  pf[sf] = {2, cap};
  Cycle z;
  z.degree = 1;
  z.bounds = product_chain(m, pf);
  z.chain = boundary(m, 2, *z.bounds);
  return z;
}

double holonomy(const HermitianLineBundle& L, const Cycle& z) {
  const auto& m = *L.base;
  if (z.degree != 1 || z.chain.size() != m.count(1)) throw std::invalid_argument("holonomy needs a 1-chain");
  if (boundary(m, 1, z.chain).cwiseAbs().maxCoeff() > 1e-9) throw ValidationError("chain is not closed");
  std::vector<double> pa, pb, h;
  std::vector<int> axes;
  double s = 0;
  for (int e = 0; e < m.count(1); ++e) {
    if (z.chain[e] == 0.0) continue;
    auto c = m.decode(1, e);
    auto ca = m.face(c, 0, 0), cb = m.face(c, 0, 1);
    int va = m.encode(ca), vb = m.encode(cb);
    m.geometry(ca, pa, h, axes);
    m.geometry(cb, pb, h, axes);
    int j = L.first_patch(1, e);
    int ra = L.first_patch(0, va), rb = L.first_patch(0, vb);
    double a = L.local_connection[j][e] - L.transition(rb, j, pb.data()) + L.transition(ra, j, pa.data());
    s += z.chain[e] * a;
  }
  s -= std::floor(s);
  return s >= 1.0 ? 0.0 : s;
}

double flux(const HermitianLineBundle& L, const Eigen::VectorXd& chain2) { return chain2.dot(L.curvature[2]); }

// ---------------------------------------------------------------------------

CircleBundleTotal build_circle_bundle(std::shared_ptr<const HermitianLineBundle> L, int fiber_points) {
  if (fiber_points < 8) throw std::invalid_argument("fiber needs at least 8 points");
  L->validate();
  CircleBundleTotal t;
  t.bundle = L;
  t.fiber_points = fiber_points;
  const auto& base = *L->base;
  int sf = L->layout.sphere_factor;
  for (int p = 0; p < L->patch_count(); ++p) {
    std::vector<Factor> bf;
    for (int f = 0; f < base.factor_count(); ++f) {
      if (f == sf)
        bf.push_back(face_patch(lattice_n(base.factor(f)), patch_axis(p), patch_sign(p)));
      else
        bf.push_back(base.factor(f));
    }
    TotalChart c;
    c.patch = p;
    c.base = std::make_shared<const ProductMesh>(bf);
    bf.push_back(circle_grid(fiber_points, "fiber"));
    c.total = std::make_shared<const ProductMesh>(bf);
    int fiber = c.total->param_dim() - 1;
    SmoothForm A = L->connection_form(p, L->layout.sphere_param);
    c.gamma_smooth = SmoothForm{1, [A, fiber](const double* q, const int* ax) {
                                  return ax[0] == fiber ? 1.0 : A.component(q, ax);
                                }};
    c.beta_smooth = L->curvature_form(L->layout.sphere_param);
    c.gamma = DiscreteForm::homogeneous(c.total, 1, de_rham(*c.total, c.gamma_smooth, L->quadrature));
    c.beta = d(c.gamma);
    t.charts.push_back(std::move(c));
  }
  return t;
}

// ---------------------------------------------------------------------------

double TwistFunction::value(const double* p) const {
  double x = p[0], g = 0;
  if (layout.sphere_param >= 0) {
    g = std::sin(2 * M_PI * x) * sphere_point(p + layout.sphere_param)[2];
  } else if (layout.second_circle_param >= 0) {
    g = std::sin(2 * M_PI * x) * std::cos(2 * M_PI * p[layout.second_circle_param]);
  }
  return winding * x + eps * g;
}

double TwistFunction::grad(const double* p, int axis) const {
  double x = p[0];
  double s = std::sin(2 * M_PI * x), c = std::cos(2 * M_PI * x);
  if (layout.sphere_param >= 0) {
    auto y = sphere_point(p + layout.sphere_param);
    if (axis == 0) return winding + eps * 2 * M_PI * c * y[2];
    int a = axis - layout.sphere_param;
    if (a >= 0 && a < 3) {
      double J[3][3];
      sphere_jacobian(p + layout.sphere_param, J);
      return eps * s * J[2][a];
    }
    return 0.0;
  }
  if (layout.second_circle_param >= 0) {
    double z = p[layout.second_circle_param];
    if (axis == 0) return winding + eps * 2 * M_PI * c * std::cos(2 * M_PI * z);
    if (axis == layout.second_circle_param) return -eps * s * 2 * M_PI * std::sin(2 * M_PI * z);
    return 0.0;
  }
  return axis == 0 ? winding : 0.0;
}

SmoothForm TwistFunction::df() const {
  TwistFunction self = *this;
  return SmoothForm{1, [self](const double* p, const int* ax) { return self.grad(p, ax[0]); }};
}

int winding_of(const CircleValuedMap& u, const Nerve& n) {
  u.validate(n);
  IntVector cu = class_coordinates(u.transitions, n);
  IntVector cg = class_coordinates(winding_map(n, 1).transitions, n);
  int idx = -1;
  for (int i = 0; i < cg.size(); ++i)
    if (cg[i] != 0) idx = i;
  if (idx < 0) throw ValidationError("nerve has no circle generator");
  std::int64_t w = cu[idx] / cg[idx];
  if (cu != w * cg) throw ValidationError("circle map transitions are not a multiple of the circle generator");
  return static_cast<int>(w);
}

namespace {

std::shared_ptr<const ProductMesh> pair_mesh(const ProductMesh& base, int M) {
  std::vector<Factor> f;
  for (int i = 0; i < base.factor_count(); ++i) f.push_back(base.factor(i));
  f.push_back(circle_grid(M, "fiber1"));
  f.push_back(circle_grid(M, "fiber2"));
  return std::make_shared<const ProductMesh>(f);
}

// d of the shift character on a mesh whose last `fibers` factors are fiber copies:
// s = theta_a - theta_b lifted edgewise.
DiscreteForm dlog_shift(std::shared_ptr<const ProductMesh> m, int fa, int fb) {
  int M = m->factor(fa).count(0);
  Eigen::VectorXd s(m->count(0));
  for (int v = 0; v < m->count(0); ++v) {
    auto c = m->decode(0, v);
    s[v] = static_cast<double>(shift_character(c.idx[fa], c.idx[fb], M)) / M;
  }
  Eigen::VectorXd ds = coboundary(*m, 0, s);
  for (auto& x : ds) x = wrap_half(x);
  return DiscreteForm::homogeneous(m, 1, ds);
}

DiscreteForm vertex_function(std::shared_ptr<const ProductMesh> m, const TwistFunction& f) {
  Eigen::VectorXd v(m->count(0));
  std::vector<double> p, h;
  std::vector<int> axes;
  for (int i = 0; i < m->count(0); ++i) {
    m->geometry(m->decode(0, i), p, h, axes);
    v[i] = f.value(p.data());
  }
  return DiscreteForm::homogeneous(m, 0, v);
}

DiscreteForm seam_form(std::shared_ptr<const ProductMesh> m, int winding) {
  std::vector<std::pair<int, Eigen::VectorXd>> pf;
  int M = m->factor(0).count(1);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(M);
  e[M - 1] = winding;
  pf.push_back({1, e});
  for (int f = 1; f < m->factor_count(); ++f) pf.push_back({0, Eigen::VectorXd::Ones(m->factor(f).count(0))});
  return DiscreteForm::homogeneous(m, 1, product_chain(*m, pf));
}

PrimitiveChart primitive_chart(std::shared_ptr<const ProductMesh> base, const TwistFunction& f,
                               const DiscreteForm* gamma, int M) {
  PrimitiveChart c;
  int B = base->factor_count();
  c.pair = pair_mesh(*base, M);
  c.alpha = alpha_bar(base, f);
  c.f0 = vertex_function(c.pair, f);
  c.seam = seam_form(c.pair, f.winding);
  c.dlog_s = dlog_shift(c.pair, B, B + 1);
  c.connection = wedge(c.f0, c.dlog_s);
  c.curvature = d(c.connection) + wedge(c.seam, c.dlog_s);
  if (gamma) {
    auto m1 = identity_map(B + 1), m2 = identity_map(B + 1);
    m2[B] = B + 1;
    c.gamma1 = pullback(*gamma, c.pair, m1);
    c.gamma2 = pullback(*gamma, c.pair, m2);
  }
  return c;
}

}  // namespace

DiscreteForm alpha_bar(std::shared_ptr<const ProductMesh> m, const TwistFunction& f) {
  // R(df) by Stokes: vertex differences of the lift plus the winding across the seam
  return d(vertex_function(m, f)) + seam_form(m, f.winding);
}

double shift_character_residual(const CircleBundleTotal& t, int chart) {
  const auto& ch = t.charts.at(chart);
  int B = ch.base->factor_count();
  auto pair = pair_mesh(*ch.base, t.fiber_points);
  auto ds = dlog_shift(pair, B, B + 1);
  auto m1 = identity_map(B + 1), m2 = identity_map(B + 1);
  m2[B] = B + 1;
  auto diff = ds - (pullback(ch.gamma, pair, m1) - pullback(ch.gamma, pair, m2));
  return diff.density_sup();
}

PrimitiveBundle build_primitive_bundle(const CircleBundleTotal& t, int winding, double eps) {
  PrimitiveBundle J;
  J.total = &t;
  J.f.winding = winding;
  J.f.eps = eps;
  J.f.layout = t.bundle->layout;
  for (const auto& ch : t.charts)
    J.charts.push_back(primitive_chart(ch.base, J.f, &ch.gamma, t.fiber_points));
  return J;
}

PrimitiveBundle build_primitive_bundle(const CircleValuedMap& u, const Nerve& n, const CircleBundleTotal& t,
                                       double eps) {
  return build_primitive_bundle(t, winding_of(u, n), eps);
}

PrimitivityReport check_primitivity(const PrimitiveBundle& J, int samples, unsigned seed) {
  PrimitivityReport r;
  int M = J.total->fiber_points;
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> I(0, M - 1);
  std::uniform_int_distribution<int> Nn(-3, 3);
  auto dist = [M](long v) {
    long x = ((v % M) + M) % M;
    return std::min(x, M - x);
  };
  for (int s = 0; s < samples; ++s) {
    int i1 = I(rng), i2 = I(rng), i3 = I(rng), i4 = I(rng), n = Nn(rng);
    long s12 = shift_character(i1, i2, M), s23 = shift_character(i2, i3, M), s13 = shift_character(i1, i3, M);
    long s34 = shift_character(i3, i4, M), s14 = shift_character(i1, i4, M);
    r.transition_defect = std::max(r.transition_defect, dist(s12 + s23 - s13));
    r.associativity_defect = std::max(r.associativity_defect, dist((s12 + s23) + s34 - s14));
    r.associativity_defect = std::max(r.associativity_defect, dist(s12 + (s23 + s34) - s14));
    r.deck_defect = std::max(r.deck_defect, dist(n * s12 + n * s23 - n * s13));
  }
  // chart independence of s on overlaps
  if (J.total->bundle->patch_count() > 1) {
    std::uniform_real_distribution<double> U(-1, 1), T(0, 1);
    const auto& L = *J.total->bundle;
    std::vector<double> p(J.total->charts[0].base->param_dim(), 0.0);
    for (int s = 0; s < samples; ++s) {
      double P[3] = {1.0, U(rng), 1.0};  // edge shared by patches 0 and 4
      for (int a = 0; a < 3; ++a) p[L.layout.sphere_param + a] = P[a];
      double th = L.transition(0, 4, p.data());
      double a1 = T(rng), a2 = T(rng);
      double sj = a1 - a2, sk = (a1 - th) - (a2 - th);
      r.chart_change_defect = std::max(r.chart_change_defect, std::abs(wrap_half(sj - sk)));
    }
  }
  // connection: pi_S* + pi_F* - pi_C* on the triple fiber product of chart 0
  // on a coarse copy of chart 0; the identity is pointwise in the base
  std::vector<Factor> cf;
  const auto& b0 = *J.total->charts[0].base;
  for (int i = 0; i < b0.factor_count(); ++i) {
    const Factor& f = b0.factor(i);
    cf.push_back(f.type == FactorType::Lattice ? face_patch(2, patch_axis(0), patch_sign(0)) : f);
  }
  auto base = std::make_shared<const ProductMesh>(cf);
  int B = base->factor_count();
  const int m3 = 8;
  auto pc = primitive_chart(base, J.f, nullptr, m3);
  std::vector<Factor> tf;
  for (int i = 0; i < B; ++i) tf.push_back(base->factor(i));
  for (int i = 0; i < 3; ++i) tf.push_back(circle_grid(m3));
  auto triple = std::make_shared<const ProductMesh>(tf);
  auto mS = identity_map(B + 2), mF = identity_map(B + 2), mC = identity_map(B + 2);
  for (int i = 0; i < 2; ++i) {
    mF[B + i] = B + 1 + i;
    mC[B + i] = B + 2 * i;
  }
  auto defect = pullback(pc.connection, triple, mS) + pullback(pc.connection, triple, mF) -
                pullback(pc.connection, triple, mC);
  r.connection_defect = defect.max_abs();
  return r;
}

CurvatureReport curvature_report(const PrimitiveBundle& J, int quadrature) {
  CurvatureReport r;
  const auto& t = *J.total;
  const auto& L = *t.bundle;
  SmoothForm df = J.f.df();
  r.h = 1.0 / t.charts[0].base->factor(0).count(0);
  for (std::size_t ci = 0; ci < t.charts.size(); ++ci) {
    const auto& ch = t.charts[ci];
    const auto& pc = J.charts[ci];
    int B = ch.base->factor_count();
    auto toBase = identity_map(B);
    auto alpha_tot = pullback(pc.alpha, ch.total, toBase);
    auto mu = wedge(alpha_tot, ch.gamma);
    auto mu_ref = DiscreteForm::homogeneous(ch.total, 2, de_rham(*ch.total, smooth_wedge(df, ch.gamma_smooth), quadrature));
    auto m1 = identity_map(B + 1), m2 = identity_map(B + 1);
    m2[B] = B + 1;
    auto Fref = pullback(mu_ref, pc.pair, m1) - pullback(mu_ref, pc.pair, m2);
    auto Fdisc = pullback(mu, pc.pair, m1) - pullback(mu, pc.pair, m2);
    r.F_residual = std::max(r.F_residual, (pc.curvature - Fref).density_sup());
    r.F_exact_residual = std::max(r.F_exact_residual, (pc.curvature - Fdisc).max_abs());
    auto dmu = d(mu);
    auto ref3 = DiscreteForm::homogeneous(ch.total, 3,
                                          de_rham(*ch.total, smooth_wedge(df, ch.beta_smooth), quadrature));
    r.dmu_residual = std::max(r.dmu_residual, (dmu + ref3).density_sup());
    auto Abase = DiscreteForm::homogeneous(
        ch.base, 1, de_rham(*ch.base, L.connection_form(ch.patch, L.layout.sphere_param), L.quadrature));
    auto delta = wedge(pc.alpha, d(Abase));
    r.dmu_exact_residual = std::max(r.dmu_exact_residual, (dmu + pullback(delta, ch.total, toBase)).max_abs());
    r.mu.push_back(std::move(mu));
  }
  const auto& pc = J.charts[0];
  const auto& pm = *pc.pair;
  int B = t.charts[0].base->factor_count();
  std::vector<std::pair<int, Eigen::VectorXd>> pf;
  for (int f = 0; f < pm.factor_count(); ++f) {
    if (f == 0 || f == B) {
      pf.push_back({1, Eigen::VectorXd::Ones(pm.factor(f).count(1))});
    } else {
      Eigen::VectorXd ind = Eigen::VectorXd::Zero(pm.factor(f).count(0));
      ind[0] = 1;
      pf.push_back({0, ind});
    }
  }
  r.F_period = product_chain(pm, pf).dot(pc.curvature[2]);
  return r;
}

}  // namespace tk
