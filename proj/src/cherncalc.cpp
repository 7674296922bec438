#include "tk/cherncalc.hpp"

#include "tk/bundlegeom.hpp"
#include "tk/cech.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace tk {

namespace {

const cd k2pii(0.0, 2 * M_PI);

int popcount(int m) { return __builtin_popcount(static_cast<unsigned>(m)); }

// sign of reordering the directions of a followed by those of b increasingly
int merge_sign(int a, int b) {
  int inv = 0;
  for (int i = 0; i < 16; ++i)
    if (a >> i & 1) inv += popcount(b & ((1 << i) - 1));
  return inv % 2 ? -1 : 1;
}

// sign of sorting a list of distinct local directions
int sort_sign(const int* l, int k) {
  int inv = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (l[i] > l[j]) ++inv;
  return inv % 2 ? -1 : 1;
}

CMatrix mul(const CMatrix& a, const CMatrix& b) { return cmatmul(a, b); }

ScalarForm swedge(const ScalarForm& a, const ScalarForm& b) {
  ScalarForm r(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j)
      if (!(i & j) && b[j] != 0.0) r[i | j] += double(merge_sign(i, j)) * a[i] * b[j];
  }
  return r;
}

// R = beta (D - f) - df ^ gamma, the scalar part only on L~
OpForm curvature_op(const LocalConnection& c, const CMatrix& D) {
  const int n = D.rows();
  OpForm R(c.dim, n);
  const CMatrix Df = D - c.f * CMatrix::Identity(n, n);
  auto gamma = [&](int k) { return k == c.fiber ? 1.0 + c.A[k] : c.A[k]; };
  for (int i = 0; i < c.dim; ++i)
    for (int j = i + 1; j < c.dim; ++j) {
      double b = c.beta(i, j), s = 0;
      if (c.fiber >= 0) s = c.df[i] * gamma(j) - c.df[j] * gamma(i);
      if (b == 0 && s == 0) continue;
      R.at((1 << i) | (1 << j)) = b * Df - s * CMatrix::Identity(n, n);
    }
  return R;
}

ScalarForm mu_form(const LocalConnection& c) {
  ScalarForm m(std::size_t(1) << c.dim, 0.0);
  auto gamma = [&](int k) { return k == c.fiber ? 1.0 + c.A[k] : c.A[k]; };
  for (int i = 0; i < c.dim; ++i)
    for (int j = i + 1; j < c.dim; ++j) m[(1 << i) | (1 << j)] = c.df[i] * gamma(j) - c.df[j] * gamma(i);
  return m;
}

// sixth-order central difference weights at offsets 1..3
const double kFd[3] = {45.0 / 60, -9.0 / 60, 1.0 / 60};

template <class T, class F>
T central_diff(F eval, double h) {
  T r = (eval(h) - eval(-h)) * (kFd[0] / h);
  r += (eval(2 * h) - eval(-2 * h)) * (kFd[1] / h);
  r += (eval(3 * h) - eval(-3 * h)) * (kFd[2] / h);
  return r;
}

// parameter index of each local base direction of a patch
std::array<int, 3> base_params(int patch) {
  auto t = TwistedGeometry::tangent_axes(patch);
  return {0, 1 + t[0], 1 + t[1]};
}

int mode_count(int N) { return 2 * N + 1; }

CMatrix mode_operator(int lo, int hi, int rank) {
  ModeBand b{lo, hi, rank};
  return b.D();
}

SymbolData scale(const SymbolData& s, double a) {
  SymbolData r = s;
  for (auto& c : r.plus.coeffs) c *= a;
  for (auto& c : r.minus.coeffs) c *= a;
  return r;
}

void add_to(SymbolData& r, const SymbolData& s) {
  for (std::size_t j = 0; j < r.plus.coeffs.size(); ++j) r.plus.coeffs[j] += s.plus.coeffs[j];
  for (std::size_t j = 0; j < r.minus.coeffs.size(); ++j) r.minus.coeffs[j] += s.minus.coeffs[j];
}

std::vector<SymbolData> symbol_derivs(const SymbolFamily& fam, int patch, const double* p) {
  const double h = 1e-3;
  auto ax = base_params(patch);
  std::vector<SymbolData> ds;
  for (int i = 0; i < 3; ++i) {
    auto eval = [&](double t) {
      double q[4] = {p[0], p[1], p[2], p[3]};
      q[ax[i]] += t;
      return fam.symbol(patch, q);
    };
    SymbolData r = scale(eval(h), kFd[0] / h);
    add_to(r, scale(eval(-h), -kFd[0] / h));
    add_to(r, scale(eval(2 * h), kFd[1] / h));
    add_to(r, scale(eval(-2 * h), -kFd[1] / h));
    add_to(r, scale(eval(3 * h), kFd[2] / h));
    add_to(r, scale(eval(-3 * h), -kFd[2] / h));
    ds.push_back(r);
  }
  return ds;
}

double transition_slope(double xi) {
  if (xi <= -1 || xi >= 1) return 0.0;
  double t = 0.5 * (xi + 1);
  double a = std::exp(-1 / t), b = std::exp(-1 / (1 - t));
  return 0.5 * a * b * (1 / (t * t) + 1 / ((1 - t) * (1 - t))) / ((a + b) * (a + b));
}

CMatrix quantize_weighted(const SymbolData& s, const ModeBand& b, double f, const std::function<double(double)>& wp,
                          const std::function<double(double)>& wm) {
  CMatrix P = CMatrix::Zero(b.size(), b.size());
  const int r = b.rank;
  for (int k = b.lo; k <= b.hi; ++k) {
    double xi = k - f;
    double cp = wp(xi), cm = wm(xi);
    auto put = [&](const FiberSymbol& a, double w) {
      if (w == 0) return;
      for (std::size_t j = 0; j < a.modes.size(); ++j) {
        int m = k + a.modes[j];
        if (m < b.lo || m > b.hi) continue;
        P.block(b.index(m), b.index(k), r, r) += w * a.coeffs[j];
      }
    };
    put(s.plus, cp);
    put(s.minus, cm);
  }
  return P;
}

void require_unitary(const FiberSymbol& a) {
  for (int q = 0; q < 7; ++q) {
    CMatrix u = a.at(q / 7.0);
    double e = (u * u.adjoint() - CMatrix::Identity(a.rank, a.rank)).cwiseAbs().maxCoeff();
    if (e > 1e-10) throw ValidationError("symbol end is not unitary");
  }
}

ScalarForm odd_symbol_chern(const FiberSymbol& a, const std::vector<FiberSymbol>& da, double theta) {
  std::vector<CMatrix> d;
  for (const auto& s : da) d.push_back(s.at(theta));
  d.push_back(a.dtheta(theta));
  const int dim = static_cast<int>(d.size());
  return odd_chern_point(a.at(theta), d, LocalConnection::flat(dim), CMatrix::Zero(a.rank, a.rank), dim / 2 + 1);
}

// Choice of chart for evaluating a form on S^1 x S^2 (or S^2) at parameter
// point P along the given cube axes: a patch containing P whose normal is not
// among the axes.
int chart_for(const double* P, const int* sphere_axes, int k) {
  int best = -1;
  double bestv = -1;
  for (int c = 0; c < 3; ++c) {
    bool used = false;
    for (int i = 0; i < k; ++i) used |= sphere_axes[i] == c;
    if (used) continue;
    if (std::abs(P[c]) > bestv) bestv = std::abs(P[c]), best = c;
  }
  return 2 * best + (P[best] > 0 ? 0 : 1);
}

// Smooth form of degree k on a base mesh from pointwise components in local
// directions (x, tangent axes); x_param < 0 when the mesh has no x factor.
SmoothForm base_form(int k, int x_param, int P_param, double x_fixed,
                     std::shared_ptr<std::function<ScalarForm(int, const double*)>> w) {
  return SmoothForm{k, [=](const double* pp, const int* axes) {
                      double p[4] = {x_param >= 0 ? pp[x_param] : x_fixed, pp[P_param], pp[P_param + 1], pp[P_param + 2]};
                      int sph[3], ns = 0;
                      for (int i = 0; i < k; ++i)
                        if (axes[i] != x_param) sph[ns++] = axes[i] - P_param;
                      int patch = chart_for(p + 1, sph, ns);
                      auto t = TwistedGeometry::tangent_axes(patch);
                      int loc[3], mask = 0;
                      for (int i = 0; i < k; ++i) {
                        if (axes[i] == x_param) {
                          loc[i] = 0;
                        } else {
                          int a = axes[i] - P_param;
                          loc[i] = a == t[0] ? 1 : 2;
                        }
                        mask |= 1 << loc[i];
                      }
                      ScalarForm v = (*w)(patch, p);
                      return sort_sign(loc, k) * v[mask].real();
                    }};
}

struct PointCache {
  std::map<std::array<double, 5>, ScalarForm> m;
  double imag = 0;
  ScalarForm get(int patch, const double* p, const std::function<ScalarForm(int, const double*)>& f) {
    std::array<double, 5> key{double(patch), p[0], p[1], p[2], p[3]};
    auto it = m.find(key);
    if (it != m.end()) return it->second;
    ScalarForm v = f(patch, p);
    for (auto& c : v) imag = std::max(imag, std::abs(c.imag()));
    m.emplace(key, v);
    return v;
  }
};

DiscreteForm character_form(const std::function<ScalarForm(int, const double*)>& w,
                            std::shared_ptr<const ProductMesh> base, int q, double* imag = nullptr) {
  int x_param = -1, P_param = -1;
  for (int f = 0; f < base->factor_count(); ++f) {
    if (base->factor(f).type == FactorType::Circle || base->factor(f).type == FactorType::Interval) {
      if (x_param < 0) x_param = base->param_offset(f);
    } else if (base->factor(f).type == FactorType::Lattice) {
      P_param = base->param_offset(f);
    }
  }
  if (P_param < 0) throw std::invalid_argument("base mesh needs a cube-sphere factor");
  auto cache = std::make_shared<PointCache>();
  auto fn = std::make_shared<std::function<ScalarForm(int, const double*)>>(
      [cache, w](int patch, const double* p) { return cache->get(patch, p, w); });
  std::vector<SmoothForm> parts;
  for (int k = 0; k <= base->dim(); k += 2) parts.push_back(base_form(k, x_param, P_param, 0.0, fn));
  auto r = de_rham_form(base, parts, q);
  if (imag) *imag = cache->imag;
  return r;
}

}  // namespace

int mask_degree(int mask) { return popcount(mask); }

// ---------------------------------------------------------------------------
// operator-valued forms

OpForm::OpForm(int dim, int n) : dim(dim), n(n), c(std::size_t(1) << dim) {}

OpForm OpForm::constant(int dim, const CMatrix& m) {
  OpForm r(dim, static_cast<int>(m.rows()));
  r.c[0] = m;
  return r;
}

CMatrix& OpForm::at(int mask) {
  if (!has(mask)) c[mask] = CMatrix::Zero(n, n);
  return c[mask];
}

OpForm& OpForm::operator+=(const OpForm& o) {
  for (std::size_t m = 0; m < c.size(); ++m)
    if (o.has(m)) at(m) += o.c[m];
  return *this;
}

OpForm OpForm::operator*(cd s) const {
  OpForm r = *this;
  for (auto& m : r.c)
    if (m.size()) m *= s;
  return r;
}

OpForm OpForm::left(const CMatrix& m) const {
  OpForm r(dim, static_cast<int>(m.rows()));
  for (std::size_t k = 0; k < c.size(); ++k)
    if (has(k)) r.c[k] = mul(m, c[k]);
  return r;
}

OpForm OpForm::right(const CMatrix& m) const {
  OpForm r(dim, static_cast<int>(m.cols()));
  for (std::size_t k = 0; k < c.size(); ++k)
    if (has(k)) r.c[k] = mul(c[k], m);
  return r;
}

std::vector<cd> OpForm::trace() const {
  std::vector<cd> t(c.size(), 0.0);
  for (std::size_t k = 0; k < c.size(); ++k)
    if (has(k)) t[k] = c[k].trace();
  return t;
}

OpForm wedge(const OpForm& a, const OpForm& b) {
  OpForm r(a.dim, a.n);
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    if (!a.has(i)) continue;
    for (std::size_t j = 0; j < b.c.size(); ++j) {
      if ((i & j) || !b.has(j)) continue;
      CMatrix p = mul(a.c[i], b.c[j]);
      if (merge_sign(i, j) < 0) p = -p;
      r.at(i | j) += p;
    }
  }
  return r;
}

namespace {

// tr(a ^ b) without forming the products
ScalarForm trace_wedge(const OpForm& a, const OpForm& b) {
  ScalarForm r(a.c.size(), 0.0);
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    if (!a.has(i)) continue;
    for (std::size_t j = 0; j < b.c.size(); ++j) {
      if ((i & j) || !b.has(j)) continue;
      r[i | j] += double(merge_sign(i, j)) * (a.c[i].cwiseProduct(b.c[j].transpose())).sum();
    }
  }
  return r;
}

}  // namespace

OpForm exp_form(const OpForm& w) {
  OpForm r = OpForm::constant(w.dim, CMatrix::Identity(w.n, w.n));
  OpForm term = w;
  r += term;
  for (int k = 2; 2 * k <= w.dim; ++k) {
    term = wedge(term, w) * cd(1.0 / k);
    r += term;
  }
  return r;
}

LocalConnection LocalConnection::flat(int dim) {
  LocalConnection c;
  c.dim = dim;
  c.A.assign(dim, 0.0);
  c.beta = Eigen::MatrixXd::Zero(dim, dim);
  c.df.assign(dim, 0.0);
  return c;
}

CMatrix ModeBand::D() const {
  CMatrix D = CMatrix::Zero(size(), size());
  for (int k = lo; k <= hi; ++k)
    for (int c = 0; c < rank; ++c) D(index(k, c), index(k, c)) = double(k);
  return D;
}

std::vector<CMatrix> covariant(const CMatrix& X, const std::vector<CMatrix>& dX, const LocalConnection& c,
                               const CMatrix& D) {
  std::vector<CMatrix> r(dX.size());
  CMatrix comm;
  bool need = false;
  for (int i = 0; i < c.dim; ++i) need |= c.A[i] != 0;
  if (need) comm = mul(D, X) - mul(X, D);
  for (int i = 0; i < c.dim; ++i) {
    r[i] = dX[i];
    if (c.A[i] != 0) r[i] -= k2pii * c.A[i] * comm;
  }
  return r;
}

ScalarForm odd_chern_point(const CMatrix& A, const std::vector<CMatrix>& dA, const LocalConnection& c,
                           const CMatrix& D, int t_nodes) {
  const int n = static_cast<int>(A.rows());
  Eigen::PartialPivLU<CMatrix> lu(A);
  const auto piv = lu.matrixLU().diagonal().cwiseAbs();
  const double ratio = piv.minCoeff() / piv.maxCoeff();
  if (!(ratio > 1e-12)) throw ValidationError("odd character: operator is not invertible (pivot ratio " + std::to_string(ratio) + ")");
  const CMatrix Ainv = lu.inverse();
  auto nA = covariant(A, dA, c, D);
  OpForm th(c.dim, n);
  for (int i = 0; i < c.dim; ++i) th.c[1 << i] = mul(Ainv, nA[i]);
  OpForm R = curvature_op(c, D);
  OpForm ARA = R.left(Ainv).right(A);
  OpForm th2 = wedge(th, th);
  std::vector<double> t, w;
  gauss_legendre01(t_nodes, t, w);
  ScalarForm out(std::size_t(1) << c.dim, 0.0);
  for (std::size_t q = 0; q < t.size(); ++q) {
    OpForm X = R * cd(1 - t[q]) + ARA * cd(t[q]) + th2 * (t[q] * (1 - t[q]) / k2pii);
    auto tr = trace_wedge(th, exp_form(X));
    for (std::size_t m = 0; m < out.size(); ++m) out[m] += w[q] * tr[m];
  }
  for (auto& v : out) v /= k2pii;
  return out;
}

ScalarForm even_chern_point(const CMatrix& e, const std::vector<CMatrix>& de, const CMatrix& e0,
                            const LocalConnection& c, const CMatrix& D) {
  const int n = static_cast<int>(e.rows());
  const CMatrix I = CMatrix::Identity(n, n);
  if ((mul(e, e) - e).cwiseAbs().maxCoeff() > 1e-10) throw ValidationError("even character: e is not idempotent");
  auto ne = covariant(e, de, c, D);
  OpForm Ne(c.dim, n);
  for (int i = 0; i < c.dim; ++i) Ne.c[1 << i] = ne[i];
  OpForm R = curvature_op(c, D);
  OpForm Om = R.left(e).right(e) + wedge(Ne, Ne).left(e).right(e) * (-1.0 / k2pii);
  OpForm E = exp_form(Om);
  E.c[0] -= I;
  auto t1 = E.left(e).trace();
  OpForm E0 = exp_form(R.left(e0).right(e0));
  E0.c[0] -= I;
  auto t0 = E0.left(e0).trace();
  ScalarForm out(t1.size());
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = t1[m] - t0[m];
  out[0] += (e - e0).trace();
  return out;
}

// ---------------------------------------------------------------------------
// twisted geometry and the unitary family

TwistedGeometry TwistedGeometry::make(int degree, int winding, double eps) {
  TwistedGeometry g;
  g.degree = degree;
  g.f.winding = winding;
  g.f.eps = eps;
  g.f.layout.sphere_factor = 1;
  g.f.layout.sphere_param = 1;
  return g;
}

std::array<int, 2> TwistedGeometry::tangent_axes(int patch) {
  int a = patch_axis(patch);
  std::array<int, 2> t{};
  int k = 0;
  for (int i = 0; i < 3; ++i)
    if (i != a) t[k++] = i;
  return t;
}

LocalConnection TwistedGeometry::at(int patch, const double* p, bool with_fiber) const {
  LocalConnection c = LocalConnection::flat(with_fiber ? 4 : 3);
  auto t = tangent_axes(patch);
  double Ah[3];
  hopf_connection(patch, p + 1, Ah);
  c.A[1] = degree * Ah[t[0]];
  c.A[2] = degree * Ah[t[1]];
  HermitianLineBundle hb;
  hb.degree = degree;
  hb.layout.sphere_factor = 1;
  hb.layout.sphere_param = 1;
  int ax[2] = {1 + t[0], 1 + t[1]};
  double b = hb.curvature_form(1).component(p, ax);
  c.beta(1, 2) = b;
  c.beta(2, 1) = -b;
  c.f = f.value(p);
  c.df[0] = f.grad(p, 0);
  c.df[1] = f.grad(p, 1 + t[0]);
  c.df[2] = f.grad(p, 1 + t[1]);
  if (with_fiber) c.fiber = 3;
  return c;
}

namespace {

CMatrix hamiltonian(const UnitaryFamily& A, const double* p) {
  const int N = A.N, S = mode_count(N);
  auto y = sphere_point(p + 1);
  const double x = p[0];
  auto w = [&](int j) -> cd {
    if (j == 0) return A.strength * (y[2] + 0.5 * std::cos(2 * M_PI * x));
    int a = std::abs(j);
    cd v = A.strength / (1.0 + a * a) * std::exp(cd(0, 2 * M_PI * a * x)) * (y[0] + 0.5 * y[2] + 0.3 * a * y[1]);
    return j > 0 ? v : std::conj(v);
  };
  auto g = [](int k) { return std::exp(-k * k / 8.0); };
  CMatrix H = CMatrix::Zero(S, S);
  for (int m = -N; m <= N; ++m)
    for (int k = -N; k <= N; ++k) {
      int m0 = m - A.deck, k0 = k - A.deck;
      if (std::abs(m0) > N || std::abs(k0) > N) continue;
      H(m + N, k + N) = g(m0) * g(k0) * w(m0 - k0);
    }
  return H;
}

// U = exp(iH) and its derivatives along the local base directions, from the
// divided differences of exp(i lambda) on the spectrum of H.
void unitary_jet(const UnitaryFamily& A, int patch, const double* p, CMatrix& U, std::vector<CMatrix>& dU) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hamiltonian(A, p));
  const auto& V = es.eigenvectors();
  const auto& l = es.eigenvalues();
  const int S = static_cast<int>(l.size());
  Eigen::VectorXcd ph(S);
  for (int i = 0; i < S; ++i) ph[i] = std::exp(cd(0, l[i]));
  U = V * ph.asDiagonal() * V.adjoint();
  CMatrix G(S, S);
  for (int a = 0; a < S; ++a)
    for (int b = 0; b < S; ++b) {
      double d = 0.5 * (l[a] - l[b]);
      double sinc = std::abs(d) < 1e-8 ? 1 - d * d / 6 : std::sin(d) / d;
      G(a, b) = cd(0, 1) * std::exp(cd(0, 0.5 * (l[a] + l[b]))) * sinc;
    }
  auto ax = base_params(patch);
  dU.clear();
  for (int i = 0; i < 3; ++i) {
    CMatrix dH = central_diff<CMatrix>(
        [&](double t) {
          double q[4] = {p[0], p[1], p[2], p[3]};
          q[ax[i]] += t;
          return hamiltonian(A, q);
        },
        1e-3);
    CMatrix X = V.adjoint() * dH * V;
    dU.push_back(V * G.cwiseProduct(X) * V.adjoint());
  }
}

}  // namespace

CMatrix UnitaryFamily::at(const double* p) const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hamiltonian(*this, p));
  const int S = static_cast<int>(es.eigenvalues().size());
  Eigen::VectorXcd ph(S);
  for (int i = 0; i < S; ++i) ph[i] = std::exp(cd(0, es.eigenvalues()[i]));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

ScalarForm odd_chern_at(const UnitaryFamily& A, const TwistedGeometry& g, int patch, const double* p, int t_nodes) {
  LocalConnection c = g.at(patch, p, true);
  c.f += A.deck;
  CMatrix U;
  std::vector<CMatrix> dU;
  unitary_jet(A, patch, p, U, dU);
  dU.push_back(CMatrix::Zero(U.rows(), U.cols()));
  return odd_chern_point(U, dU, c, mode_operator(-A.N, A.N, 1), t_nodes);
}

namespace {

ScalarForm odd_base_at(const UnitaryFamily& A, const TwistedGeometry& g, int patch, const double* p, int t_nodes) {
  LocalConnection c = g.at(patch, p, false);
  c.f += A.deck;
  CMatrix U;
  std::vector<CMatrix> dU;
  unitary_jet(A, patch, p, U, dU);
  return odd_chern_point(U, dU, c, mode_operator(-A.N, A.N, 1), t_nodes);
}

}  // namespace

double deck_shift_defect(const UnitaryFamily& A, const TwistedGeometry& g, int samples, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-0.9, 0.9), ux(0.0, 1.0);
  std::uniform_int_distribution<int> up(0, 5);
  UnitaryFamily B = A;
  B.deck = A.deck + 1;
  double worst = 0;
  for (int s = 0; s < samples; ++s) {
    int patch = up(rng);
    double p[4] = {ux(rng), 0, 0, 0};
    auto t = TwistedGeometry::tangent_axes(patch);
    p[1 + patch_axis(patch)] = patch_sign(patch);
    p[1 + t[0]] = u(rng);
    p[1 + t[1]] = u(rng);
    auto a = odd_chern_at(A, g, patch, p);
    auto b = odd_chern_at(B, g, patch, p);
    for (std::size_t m = 0; m < a.size(); ++m) worst = std::max(worst, std::abs(a[m] - b[m]));
  }
  return worst;
}

double pointwise_closedness(const std::function<ScalarForm(const double*)>& w, int dim, const double* p, double h) {
  std::vector<ScalarForm> grad(dim);
  std::vector<double> q(p, p + dim);
  for (int i = 0; i < dim; ++i) {
    auto at = [&](double t) {
      q[i] = p[i] + t;
      auto v = w(q.data());
      q[i] = p[i];
      return v;
    };
    auto fp = at(h), fm = at(-h), fp2 = at(2 * h), fm2 = at(-2 * h);
    grad[i].resize(fp.size());
    for (std::size_t m = 0; m < fp.size(); ++m) grad[i][m] = (8.0 * (fp[m] - fm[m]) - (fp2[m] - fm2[m])) / (12 * h);
  }
  double worst = 0;
  for (int M = 1; M < (1 << dim); ++M) {
    cd s = 0;
    for (int i = 0; i < dim; ++i) {
      if (!(M >> i & 1)) continue;
      int sign = popcount(M & ((1 << i) - 1)) % 2 ? -1 : 1;
      s += double(sign) * grad[i][M & ~(1 << i)];
    }
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

OddChernResult odd_chern(const UnitaryFamily& A, const TwistedGeometry& g, const OddChernSettings& s) {
  const int axis = patch_axis(s.patch), sign = patch_sign(s.patch);
  auto Lm = std::make_shared<ProductMesh>(std::vector<Factor>{interval_grid(s.M, s.x0, s.x1, "x"),
                                                              face_patch(s.n, axis, sign),
                                                              circle_grid(s.fiber_points, "theta1")});
  auto Bm = std::make_shared<ProductMesh>(
      std::vector<Factor>{interval_grid(s.M, s.x0, s.x1, "x"), face_patch(s.n, axis, sign)});
  auto t = TwistedGeometry::tangent_axes(s.patch);
  auto local = [t](int a) {
    if (a == 0) return 0;
    if (a == 1 + t[0]) return 1;
    if (a == 1 + t[1]) return 2;
    if (a == 4) return 3;
    return -1;
  };
  const int patch = s.patch, tn = s.t_nodes;
  auto cacheL = std::make_shared<PointCache>(), cacheB = std::make_shared<PointCache>();
  auto make = [&](int k, std::shared_ptr<PointCache> cache, bool fiber) {
    return SmoothForm{k, [=, &A, &g](const double* p, const int* axes) {
                        int loc[4], mask = 0;
                        for (int i = 0; i < k; ++i) {
                          loc[i] = local(axes[i]);
                          if (loc[i] < 0) return 0.0;
                          mask |= 1 << loc[i];
                        }
                        auto v = cache->get(patch, p, [&](int pt, const double* pp) {
                          return fiber ? odd_chern_at(A, g, pt, pp, tn) : odd_base_at(A, g, pt, pp, tn);
                        });
                        return sort_sign(loc, k) * v[mask].real();
                      }};
  };
  OddChernResult r;
  r.ch.parity = "odd";
  r.ch.form = de_rham_form(Lm, {make(1, cacheL, true), make(3, cacheL, true)}, s.quadrature);
  r.v = de_rham_form(Bm, {make(1, cacheB, false), make(3, cacheB, false)}, s.quadrature);
  r.h = 2.0 / s.n;
  r.ch.closedness_residual = d(r.ch.form).density_sup();

  auto alpha = de_rham_form(Lm, {g.f.df()}, s.quadrature);
  double lie = lie_fiber(r.ch.form, 2).density_sup();
  double iota = (interior_fiber(r.ch.form, 2) - wedge(alpha, r.ch.form)).density_sup();
  r.ch.subcomplex_residual = std::max(lie, iota);

  const int degree = g.degree;
  SmoothForm gamma{1, [patch, degree](const double* p, const int* ax) {
                     if (ax[0] == 4) return 1.0;
                     if (ax[0] < 1 || ax[0] > 3) return 0.0;
                     double Ah[3];
                     hopf_connection(patch, p + 1, Ah);
                     return degree * Ah[ax[0] - 1];
                   }};
  SmoothForm one{0, [](const double*, const int*) { return 1.0; }};
  SmoothForm mu = smooth_wedge(g.f.df(), gamma);
  SmoothForm neg_mu{2, [mu](const double* p, const int* ax) { return -mu.component(p, ax); }};
  auto emu = de_rham_form(Lm, {one, neg_mu}, s.quadrature);
  auto pv = pullback(r.v, Lm, {0, 1});
  r.ch.factorization_residual = (r.ch.form - wedge(emu, pv)).density_sup();
  r.imaginary_part = std::max(cacheL->imag, cacheB->imag);
  r.ch.imaginary_part = r.imaginary_part;
  return r;
}

// ---------------------------------------------------------------------------
// fiber symbols

CMatrix FiberSymbol::at(double theta) const {
  CMatrix r = CMatrix::Zero(rank, rank);
  for (std::size_t j = 0; j < modes.size(); ++j) r += std::exp(k2pii * double(modes[j]) * theta) * coeffs[j];
  return r;
}

CMatrix FiberSymbol::dtheta(double theta) const {
  CMatrix r = CMatrix::Zero(rank, rank);
  for (std::size_t j = 0; j < modes.size(); ++j)
    r += k2pii * double(modes[j]) * std::exp(k2pii * double(modes[j]) * theta) * coeffs[j];
  return r;
}

FiberSymbol FiberSymbol::adjoint() const {
  FiberSymbol r;
  r.rank = rank;
  for (std::size_t j = 0; j < modes.size(); ++j) {
    r.modes.push_back(-modes[j]);
    r.coeffs.push_back(coeffs[j].adjoint());
  }
  return r;
}

FiberSymbol FiberSymbol::identity(int rank) {
  FiberSymbol r;
  r.rank = rank;
  r.modes = {0};
  r.coeffs = {CMatrix::Identity(rank, rank)};
  return r;
}

double transition_step(double xi) {
  if (xi <= -1) return 0.0;
  if (xi >= 1) return 1.0;
  double t = 0.5 * (xi + 1);
  double a = std::exp(-1 / t), b = std::exp(-1 / (1 - t));
  return a / (a + b);
}

CMatrix quantize_ends(const SymbolData& s, const ModeBand& band, double f) {
  return quantize_weighted(s, band, f, transition_step, [](double xi) { return 1 - transition_step(xi); });
}

IdempotentFamilyPoint index_idempotent_family(const SymbolData& s, const std::vector<SymbolData>& ds, double f,
                                              const std::vector<double>& df, int half_width, int margin) {
  require_unitary(s.plus);
  require_unitary(s.minus);
  const int rank = s.plus.rank;
  const int c0 = static_cast<int>(std::lround(f));
  ModeBand inner{c0 - half_width, c0 + half_width, rank};
  ModeBand ext{inner.lo - margin, inner.hi + margin, rank};
  auto inv = [](const SymbolData& a) { return SymbolData{a.plus.adjoint(), a.minus.adjoint()}; };
  const SymbolData si = inv(s);
  auto slope_p = [](double xi) { return -transition_slope(xi); };
  auto slope_m = [](double xi) { return transition_slope(xi); };

  const CMatrix P = quantize_ends(s, ext, f), Q = quantize_ends(si, ext, f);
  const int S = ext.size();
  const CMatrix I = CMatrix::Identity(S, S);
  const CMatrix S0 = I - mul(Q, P), S1 = I - mul(P, Q);
  const CMatrix S0s = mul(S0, S0), S1s = mul(S1, S1);
  const CMatrix TL = I - S0s, TR = mul(Q, S1 + S1s), BL = mul(S1, P), BR = S1s;

  const int off = margin * rank, sz = inner.size();
  auto assemble = [&](const CMatrix& a, const CMatrix& b, const CMatrix& c, const CMatrix& d) {
    CMatrix E(2 * sz, 2 * sz);
    E << a.block(off, off, sz, sz), b.block(off, off, sz, sz), c.block(off, off, sz, sz), d.block(off, off, sz, sz);
    return E;
  };

  IdempotentFamilyPoint r;
  r.band = inner;
  r.E1 = assemble(TL, TR, BL, BR);
  r.E0 = CMatrix::Zero(2 * sz, 2 * sz);
  r.E0.topLeftCorner(sz, sz).setIdentity();
  r.D = CMatrix::Zero(2 * sz, 2 * sz);
  const CMatrix Dn = inner.D();
  r.D.topLeftCorner(sz, sz) = Dn;
  r.D.bottomRightCorner(sz, sz) = Dn;

  for (std::size_t i = 0; i < ds.size(); ++i) {
    CMatrix dP = quantize_ends(ds[i], ext, f), dQ = quantize_ends(inv(ds[i]), ext, f);
    if (i < df.size() && df[i] != 0) {
      dP += df[i] * quantize_weighted(s, ext, f, slope_p, slope_m);
      dQ += df[i] * quantize_weighted(si, ext, f, slope_p, slope_m);
    }
    const CMatrix dS0 = -(mul(dQ, P) + mul(Q, dP)), dS1 = -(mul(dP, Q) + mul(P, dQ));
    const CMatrix dS1s = mul(dS1, S1) + mul(S1, dS1);
    r.dE1.push_back(assemble(-(mul(dS0, S0) + mul(S0, dS0)), mul(dQ, S1 + S1s) + mul(Q, dS1 + dS1s),
                             mul(dS1, P) + mul(S1, dP), dS1s));
  }
  const CMatrix diff = r.E1 - r.E0;
  r.trace = diff.trace();
  r.idempotency_residual = (mul(r.E1, r.E1) - r.E1).cwiseAbs().maxCoeff();
  for (int half = 0; half < 2; ++half)
    for (int mode : {inner.lo, inner.hi})
      for (int c = 0; c < rank; ++c) {
        int i = half * sz + inner.index(mode, c);
        r.edge_mass = std::max(r.edge_mass, std::max(diff.row(i).cwiseAbs().maxCoeff(), diff.col(i).cwiseAbs().maxCoeff()));
      }
  return r;
}

namespace {

SymbolData bott_symbol(const std::array<double, 3>& y) {
  CMatrix e(2, 2);
  e << 1 + y[2], cd(y[0], -y[1]), cd(y[0], y[1]), 1 - y[2];
  e *= 0.5;
  SymbolData s;
  s.plus.rank = 2;
  s.plus.modes = {0, 1};
  s.plus.coeffs = {CMatrix::Identity(2, 2) - e, e};
  s.minus = FiberSymbol::identity(2);
  return s;
}

}  // namespace

SymbolFamily bott_family() {
  SymbolFamily f;
  f.name = "bott";
  f.on_sphere_only = true;
  f.symbol = [](int, const double* p) { return bott_symbol(sphere_point(p + 1)); };
  return f;
}

SymbolFamily rotating_bott_family() {
  SymbolFamily f;
  f.name = "rotating_bott";
  f.symbol = [](int, const double* p) {
    auto y = sphere_point(p + 1);
    double a = 0.5 * std::sin(2 * M_PI * p[0]), c = std::cos(a), s = std::sin(a);
    return bott_symbol({y[0], c * y[1] - s * y[2], s * y[1] + c * y[2]});
  };
  return f;
}

SymbolFamily hopf_su2_family() {
  SymbolFamily f;
  f.name = "hopf_su2";
  f.symbol = [](int patch, const double* p) {
    auto y = sphere_point(p + 1);
    Eigen::Vector2cd tau = hopf_section(patch, y.data());
    CMatrix c1 = CMatrix::Zero(2, 2), c2 = CMatrix::Zero(2, 2);
    c1(0, 0) = tau[0];
    c1(1, 0) = tau[1];
    c2(0, 1) = -std::conj(tau[1]);
    c2(1, 1) = std::conj(tau[0]);
    SymbolData s;
    s.plus.rank = 2;
    s.plus.modes = {1, -1};
    s.plus.coeffs = {c1, c2};
    s.minus = FiberSymbol::identity(2);
    return s;
  };
  return f;
}

ScalarForm analytic_character_at(const SymbolFamily& fam, const TwistedGeometry* g, int patch, const double* p) {
  LocalConnection c = g ? g->at(patch, p, false) : LocalConnection::flat(3);
  auto s = fam.symbol(patch, p);
  auto ds = symbol_derivs(fam, patch, p);
  auto ip = index_idempotent_family(s, ds, c.f, c.df);
  return even_chern_point(ip.E1, ip.dE1, ip.E0, c, ip.D);
}

ScalarForm topological_character_at(const SymbolFamily& fam, const TwistedGeometry* g, int patch, const double* p,
                                    int theta_points) {
  LocalConnection c = g ? g->at(patch, p, true) : LocalConnection::flat(4);
  c.fiber = 3;
  auto s = fam.symbol(patch, p);
  auto ds = symbol_derivs(fam, patch, p);
  std::vector<FiberSymbol> dp, dm;
  for (auto& d : ds) dp.push_back(d.plus), dm.push_back(d.minus);
  ScalarForm emu = mu_form(c);
  emu[0] = 1.0;
  ScalarForm out(8, 0.0);
  for (int q = 0; q < theta_points; ++q) {
    double th = double(q) / theta_points;
    auto a = odd_symbol_chern(s.plus, dp, th), b = odd_symbol_chern(s.minus, dm, th);
    for (std::size_t m = 0; m < a.size(); ++m) a[m] -= b[m];
    auto w = swedge(emu, a);
    for (int m = 8; m < 16; ++m) out[m & 7] += w[m] / double(theta_points);
  }
  for (auto& v : out) v *= double(kIndexSign);
  return out;
}

RelativeChern relative_symbol_chern(const SymbolData& s, const std::vector<SymbolData>& ds, double theta) {
  std::vector<FiberSymbol> dp, dm;
  for (auto& d : ds) dp.push_back(d.plus), dm.push_back(d.minus);
  RelativeChern r;
  r.plus = odd_symbol_chern(s.plus, dp, theta);
  r.minus = odd_symbol_chern(s.minus, dm, theta);
  r.even.assign(r.plus.size(), 0.0);
  return r;
}

double relative_fiber_pairing(const SymbolData& s, int theta_points) {
  cd sum = 0;
  for (int q = 0; q < theta_points; ++q) {
    double th = double(q) / theta_points;
    sum += (s.plus.at(th).partialPivLu().solve(s.plus.dtheta(th))).trace();
    sum -= (s.minus.at(th).partialPivLu().solve(s.minus.dtheta(th))).trace();
  }
  return (sum / (k2pii * double(theta_points))).real();
}

RelativeResidual relative_cocycle_residual(const SymbolFamily& fam, const TwistedGeometry&, int n, int quadrature) {
  const int patch = 0;
  auto Lm = std::make_shared<ProductMesh>(
      std::vector<Factor>{interval_grid(n, 0.1, 0.9, "x"), face_patch(n, 0, 1), circle_grid(2 * n, "theta1")});
  auto t = TwistedGeometry::tangent_axes(patch);
  auto cache = std::make_shared<std::map<std::array<double, 5>, ScalarForm>>();
  auto comp = [=](int k) {
    return SmoothForm{k, [=](const double* p, const int* axes) {
                        int loc[4], mask = 0;
                        for (int i = 0; i < k; ++i) {
                          int a = axes[i];
                          loc[i] = a == 0 ? 0 : a == 1 + t[0] ? 1 : a == 1 + t[1] ? 2 : a == 4 ? 3 : -1;
                          if (loc[i] < 0) return 0.0;
                          mask |= 1 << loc[i];
                        }
                        std::array<double, 5> key{p[0], p[1], p[2], p[3], p[4]};
                        auto it = cache->find(key);
                        if (it == cache->end()) {
                          auto s = fam.symbol(patch, p);
                          auto ds = symbol_derivs(fam, patch, p);
                          it = cache->emplace(key, relative_symbol_chern(s, ds, p[4]).plus).first;
                        }
                        return sort_sign(loc, k) * it->second[mask].real();
                      }};
  };
  auto w = de_rham_form(Lm, {comp(1), comp(3)}, quadrature);
  return {1.0 / n, d(w).density_sup()};
}

SpherePairing pair_on_sphere(const std::function<ScalarForm(int patch, const double* p)>& w, int n, int q, double x) {
  auto S = std::make_shared<ProductMesh>(std::vector<Factor>{cube_sphere(n)});
  auto cache = std::make_shared<PointCache>();
  auto fn = std::make_shared<std::function<ScalarForm(int, const double*)>>(
      [cache, w](int patch, const double* p) { return cache->get(patch, p, w); });
  auto v0 = de_rham(*S, base_form(0, -1, 0, x, fn), q);
  auto v2 = de_rham(*S, base_form(2, -1, 0, x, fn), q);
  SpherePairing r;
  r.degree0 = v0.mean();
  r.degree0_spread = v0.maxCoeff() - v0.minCoeff();
  r.degree2 = S->top_chain().dot(v2);
  return r;
}

IndexComparison compare_bott_index(int n, int q) {
  auto fam = bott_family();
  IndexComparison r;
  r.analytic = pair_on_sphere([&](int patch, const double* p) { return analytic_character_at(fam, nullptr, patch, p); },
                              n, q);
  r.topological = pair_on_sphere(
      [&](int patch, const double* p) { return topological_character_at(fam, nullptr, patch, p); }, n, q);
  r.difference = std::max(std::abs(r.analytic.degree0 - r.topological.degree0),
                          std::abs(r.analytic.degree2 - r.topological.degree2));
  return r;
}

DiscreteForm index_in_cohomology(const SymbolFamily& fam, const TwistedGeometry* g, std::shared_ptr<const ProductMesh> base,
                                 int q) {
  return character_form([&](int patch, const double* p) { return topological_character_at(fam, g, patch, p); }, base, q);
}

DiscreteForm analytic_index_form(const SymbolFamily& fam, const TwistedGeometry* g, std::shared_ptr<const ProductMesh> base,
                                 int q) {
  return character_form([&](int patch, const double* p) { return analytic_character_at(fam, g, patch, p); }, base, q);
}

TwistedIndexComparison compare_twisted_index(int M, int n, int q, int winding, double eps) {
  auto sc = make_scenario(M, n, 1, winding, eps);
  auto g = TwistedGeometry::make(1, winding, eps);
  auto fam = hopf_su2_family();
  TwistedIndexComparison r;
  r.M = M;
  r.n = n;
  auto van = analytic_index_form(fam, &g, sc.base, q);
  auto vtop = index_in_cohomology(fam, &g, sc.base, q);
  Eigen::MatrixXd H;
  r.dims = twisted_cohomology_dims(sc.base, sc.twist, 1e-6, &H);
  r.analytic_closedness = twisted_d(van, sc.twist).density_sup();
  r.topological_closedness = twisted_d(vtop, sc.twist).density_sup();
  r.analytic_degree0 = van.has(0) ? van[0].cwiseAbs().maxCoeff() : 0.0;
  if (H.cols() == 0) return r;
  Eigen::VectorXd hb = H.transpose() * even_vector(sc.bundle->curvature);
  const double nb = hb.squaredNorm();
  Eigen::VectorXd ha = H.transpose() * even_vector(van), ht = H.transpose() * even_vector(vtop);
  r.analytic_coordinate = hb.dot(ha) / nb;
  r.topological_coordinate = hb.dot(ht) / nb;
  r.projection_norm = (ha - ht).norm() / std::sqrt(nb);
  return r;
}

}  // namespace tk
