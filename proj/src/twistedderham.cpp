#include "tk/twistedderham.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <random>

namespace tk {

namespace {

bool closed_mesh(const ProductMesh& m) {
  for (int f = 0; f < m.factor_count(); ++f) {
    const Factor& F = m.factor(f);
    if (F.type == FactorType::Interval) return false;
    if (F.type == FactorType::Lattice && F.count(0) - F.count(1) + F.count(2) != 2) return false;
  }
  return true;
}

std::vector<int> identity_map(int n) {
  std::vector<int> m(n);
  for (int i = 0; i < n; ++i) m[i] = i;
  return m;
}

}  // namespace

TwistData make_twist(DiscreteForm delta_bar, double tol) {
  TwistData t;
  const auto& m = delta_bar.mesh();
  for (int k = 0; k <= m.dim(); ++k)
    if (k != 3 && delta_bar.has(k) && delta_bar[k].any()) throw StructuralError("twist must be a pure 3-form");
  t.closedness_residual = d(delta_bar).max_abs();
  if (t.closedness_residual > tol) throw ValidationError("twist is not closed");
  if (m.dim() == 3 && closed_mesh(m) && delta_bar.has(3)) {
    double p = m.top_chain().dot(delta_bar[3]);
    t.periods.push_back(p);
    if (std::abs(p - std::round(p)) > 1e-6) throw ValidationError("twist has a non-integral period");
  }
  t.delta_bar = std::move(delta_bar);
  return t;
}

TwistData zero_twist(std::shared_ptr<const ProductMesh> m) {
  TwistData t;
  t.delta_bar = DiscreteForm(m);
  return t;
}

DiscreteForm twisted_d(const DiscreteForm& v, const TwistData& t) {
  require_same_mesh(v, t.delta_bar);
  return d(v) + wedge(t.delta_bar, v);
}

double twisted_square_residual(const DiscreteForm& v, const TwistData& t) {
  return twisted_d(twisted_d(v, t), t).max_abs();
}

HodgeDims twisted_cohomology_dims(std::shared_ptr<const ProductMesh> m, const TwistData& t, double rel_threshold,
                                  Eigen::MatrixXd* even_harmonic) {
  require_same_mesh(DiscreteForm(m), t.delta_bar);
  int n = m->dim();
  // even / odd coordinates: concatenated degrees of each parity
  HodgeDims h;
  for (int k = 0; k <= n; ++k) (k % 2 ? h.odd_size : h.even_size) += m->count(k);
  std::vector<int> pos(n + 1);
  int e = 0, o = 0;
  for (int k = 0; k <= n; ++k) {
    pos[k] = k % 2 ? o : e;
    (k % 2 ? o : e) += m->count(k);
  }
  Eigen::MatrixXd Deo = Eigen::MatrixXd::Zero(h.odd_size, h.even_size);
  Eigen::MatrixXd Doe = Eigen::MatrixXd::Zero(h.even_size, h.odd_size);
  for (int k = 0; k <= n; ++k) {
    for (int i = 0; i < m->count(k); ++i) {
      DiscreteForm v(m);
      v[k] = Eigen::VectorXd::Zero(m->count(k));
      v[k][i] = 1.0;
      DiscreteForm w = twisted_d(v, t);
      for (int j = 0; j <= n; ++j) {
        if (!w.has(j) || (j - k) % 2 == 0) continue;
        if (k % 2 == 0)
          Deo.block(pos[j], pos[k] + i, m->count(j), 1) = w[j];
        else
          Doe.block(pos[j], pos[k] + i, m->count(j), 1) = w[j];
      }
    }
  }
  Eigen::MatrixXd A = Deo + Doe.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, even_harmonic ? Eigen::ComputeFullV : 0);
  const auto& s = svd.singularValues();
  h.sigma_max = s.size() ? s[0] : 0.0;
  h.threshold = rel_threshold * h.sigma_max;
  int rank = 0;
  double above = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.size(); ++i) {
    if (s[i] >= h.threshold) {
      ++rank;
      above = std::min(above, s[i]);
    }
  }
  h.even_dim = h.even_size - rank;
  h.odd_dim = h.odd_size - rank;
  h.gap_ratio = above / h.threshold;
  double below = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] < h.threshold) below = std::max(below, s[i]);
  h.ambiguous = h.gap_ratio < 10 || below * 10 > h.threshold;
  if (even_harmonic) *even_harmonic = svd.matrixV().rightCols(h.even_size - rank);
  return h;
}

Eigen::VectorXd even_vector(const DiscreteForm& w) {
  const auto& m = w.mesh();
  int size = 0;
  for (int k = 0; k <= m.dim(); k += 2) size += m.count(k);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size);
  int pos = 0;
  for (int k = 0; k <= m.dim(); k += 2) {
    if (w.has(k)) v.segment(pos, m.count(k)) = w[k];
    pos += m.count(k);
  }
  return v;
}

// ---------------------------------------------------------------------------

std::vector<DiscreteForm> subcomplex_map(const DiscreteForm& v, const CircleBundleTotal& tot,
                                         const DiscreteForm& alpha) {
  require_same_mesh(v, alpha);
  std::vector<DiscreteForm> out;
  for (const auto& ch : tot.charts) {
    int B = ch.base->factor_count();
    auto pv = pullback(restrict_form(v, ch.base), ch.total, identity_map(B));
    auto pa = pullback(restrict_form(alpha, ch.base), ch.total, identity_map(B));
    auto mu = wedge(pa, ch.gamma);
    out.push_back(pv - wedge(mu, pv));
  }
  return out;
}

SubcomplexResiduals subcomplex_conditions(const std::vector<DiscreteForm>& vt, const CircleBundleTotal& tot,
                                          const DiscreteForm& alpha) {
  SubcomplexResiduals r;
  int fiber = tot.fiber_factor();
  for (std::size_t c = 0; c < tot.charts.size(); ++c) {
    const auto& ch = tot.charts[c];
    int B = ch.base->factor_count();
    auto pa = pullback(restrict_form(alpha, ch.base), ch.total, identity_map(B));
    r.lie = std::max(r.lie, lie_fiber(vt[c], fiber).density_sup());
    r.iota = std::max(r.iota, (interior_fiber(vt[c], fiber) - wedge(pa, vt[c])).density_sup());
  }
  return r;
}

double conjugation_check(const DiscreteForm& v, const CircleBundleTotal& tot, const DiscreteForm& alpha,
                         const TwistData& t) {
  auto lhs = subcomplex_map(v, tot, alpha);
  auto rhs = subcomplex_map(twisted_d(v, t), tot, alpha);
  double r = 0;
  for (std::size_t c = 0; c < lhs.size(); ++c) r = std::max(r, (d(lhs[c]) - rhs[c]).density_sup());
  return r;
}

// ---------------------------------------------------------------------------

TwistedScenario make_scenario(int M, int n, int degree, int winding, double eps, int fiber_points) {
  TwistedScenario s;
  std::vector<Factor> f{circle_grid(M, "x")};
  if (n > 0) f.push_back(cube_sphere(n));
  s.base = std::make_shared<const ProductMesh>(f);
  s.bundle = std::make_shared<const HermitianLineBundle>(make_line_bundle(s.base, degree));
  s.f.winding = winding;
  s.f.eps = eps;
  s.f.layout = s.bundle->layout;
  s.alpha = alpha_bar(s.base, s.f);
  s.twist = make_twist(wedge(s.alpha, s.bundle->curvature));
  if (fiber_points > 0)
    s.total = std::make_shared<const CircleBundleTotal>(build_circle_bundle(s.bundle, fiber_points));
  return s;
}

double TrigFunction::value(const double* p) const {
  double g = c0;
  if (sphere_param >= 0) {
    auto y = sphere_point(p + sphere_param);
    for (int i = 0; i < 3; ++i) g += c[i] * y[i];
  }
  return std::cos(2 * M_PI * k * p[0] + phi) * g;
}

double TrigFunction::grad(const double* p, int axis) const {
  double g = c0;
  std::array<double, 3> y{0, 0, 0};
  if (sphere_param >= 0) {
    y = sphere_point(p + sphere_param);
    for (int i = 0; i < 3; ++i) g += c[i] * y[i];
  }
  double arg = 2 * M_PI * k * p[0] + phi;
  if (axis == 0) return -2 * M_PI * k * std::sin(arg) * g;
  int a = axis - sphere_param;
  if (sphere_param < 0 || a < 0 || a > 2) return 0.0;
  double J[3][3];
  sphere_jacobian(p + sphere_param, J);
  double dg = 0;
  for (int i = 0; i < 3; ++i) dg += c[i] * J[i][a];
  return std::cos(arg) * dg;
}

DiscreteForm random_trig_form(std::shared_ptr<const ProductMesh> m, unsigned seed, int quadrature) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  std::uniform_int_distribution<int> K(0, 2);
  int sp = -1;
  for (int f = 0; f < m->factor_count(); ++f)
    if (m->factor(f).type == FactorType::Lattice) sp = m->param_offset(f);
  auto draw = [&] {
    TrigFunction g;
    g.k = K(rng);
    g.phi = M_PI * U(rng);
    g.c0 = U(rng);
    for (auto& x : g.c) x = U(rng);
    g.sphere_param = sp;
    return g;
  };
  auto scalar = [](TrigFunction g) {
    return SmoothForm{0, [g](const double* p, const int*) { return g.value(p); }};
  };
  auto grad = [](TrigFunction g) {
    return SmoothForm{1, [g](const double* p, const int* ax) { return g.grad(p, ax[0]); }};
  };
  std::vector<SmoothForm> parts;
  for (int deg = 0; deg <= std::min(3, m->dim()); ++deg) {
    SmoothForm w = scalar(draw());
    for (int i = 0; i < deg; ++i) w = smooth_wedge(w, grad(draw()));
    parts.push_back(w);
  }
  return de_rham_form(m, parts, quadrature);
}

}  // namespace tk
