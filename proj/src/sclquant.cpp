#include "tk/sclquant.hpp"

#include "tk/bundlegeom.hpp"
#include "tk/cech.hpp"
#include "tk/mesh.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <sstream>

namespace tk {

namespace {

const cd kI(0, 1);
const double kFd[3] = {45.0 / 60, -9.0 / 60, 1.0 / 60};
constexpr double kFdStep = 1e-3;

template <class F>
CMatrix central_diff(F eval, double h = kFdStep) {
  CMatrix r = (eval(h) - eval(-h)) * (kFd[0] / h);
  r += (eval(2 * h) - eval(-2 * h)) * (kFd[1] / h);
  r += (eval(3 * h) - eval(-3 * h)) * (kFd[2] / h);
  return r;
}

int nyquist_lo(int G) { return -(G / 2); }

// a^_j(xi), j = -G/2 .. G - G/2 - 1
std::vector<CMatrix> theta_dft(const SclSymbol& a, double xi) {
  const int G = a.theta_grid, r = a.rank;
  std::vector<CMatrix> samples(G);
  for (int g = 0; g < G; ++g) samples[g] = a(a.theta_at(g), xi);
  std::vector<CMatrix> hat(G, CMatrix::Zero(r, r));
  for (int jj = 0; jj < G; ++jj) {
    int j = nyquist_lo(G) + jj;
    for (int g = 0; g < G; ++g) hat[jj] += samples[g] * std::polar(1.0 / G, -2 * M_PI * j * g / double(G));
  }
  return hat;
}

bool in_band(const TruncatedKernel& K, int m) { return m >= -K.N && m <= K.N; }

auto block(const TruncatedKernel& K, int m, int k) {
  return K.matrix.block((m + K.N) * K.rank, (k + K.N) * K.rank, K.rank, K.rank);
}
auto block(TruncatedKernel& K, int m, int k) {
  return K.matrix.block((m + K.N) * K.rank, (k + K.N) * K.rank, K.rank, K.rank);
}

CMatrix pauli_dot(const double* n) {
  CMatrix s(2, 2);
  s << n[2], cd(n[0], -n[1]), cd(n[0], n[1]), -n[2];
  return s;
}

SclSymbol symbol_of(std::function<CMatrix(double, double)> f, int rank, double R, int G) {
  return SclSymbol(rank, std::move(f), R, G);
}

}  // namespace

SclSymbol::SclSymbol(int rank_, std::function<CMatrix(double, double)> a_, double R, int G)
    : rank(rank_), a(std::move(a_)), support_radius(R), theta_grid(G) {
  if (rank < 1 || theta_grid < 2 || support_radius <= 0) throw ValidationError("symbol needs rank >= 1, theta_grid >= 2, support_radius > 0");
  double worst = 0;
  for (int g = 0; g < theta_grid; ++g)
    for (double s = 0; s <= 8; s += 0.5)
      for (double sign : {-1.0, 1.0}) {
        CMatrix v = a(theta_at(g), sign * (support_radius + s));
        if (v.rows() != rank || v.cols() != rank) throw ValidationError("symbol values have the wrong size");
        worst = std::max(worst, v.cwiseAbs().maxCoeff());
      }
  if (worst > kSclEnvelope) {
    std::ostringstream os;
    os << "symbol is " << worst << " outside its support radius " << support_radius;
    throw ValidationError(os.str());
  }
}

int required_modes(const SclSymbol& a, double eps) {
  return static_cast<int>(std::ceil(a.support_radius / eps - 1e-9)) + a.theta_grid / 2;
}

TruncatedKernel quantize_unchecked(const SclSymbol& a, double eps, int N) {
  if (!(eps > 0 && eps < 1)) throw ValidationError("eps must lie in (0, 1)");
  if (N < 0) throw ValidationError("N must be >= 0");
  const int r = a.rank, G = a.theta_grid;
  TruncatedKernel K;
  K.N = N;
  K.rank = r;
  K.matrix = CMatrix::Zero(K.size(), K.size());
  for (int k = -N; k <= N; ++k) {
    auto hat = theta_dft(a, eps * k);
    for (int jj = 0; jj < G; ++jj) {
      int m = k + nyquist_lo(G) + jj;
      if (in_band(K, m)) block(K, m, k) = hat[jj];
    }
  }
  return K;
}

TruncatedKernel quantize(const SclSymbol& a, double eps, int N) {
  int need = required_modes(a, eps);
  if (N < need) {
    std::ostringstream os;
    os << "band N = " << N << " does not cover the symbol support at eps = " << eps << "; need N >= " << need;
    throw ValidationError(os.str());
  }
  return quantize_unchecked(a, eps, N);
}

SymbolSamples scl_symbol(const TruncatedKernel& K, int G, int kmax) {
  SymbolSamples out(2 * kmax + 1, std::vector<CMatrix>(G, CMatrix::Zero(K.rank, K.rank)));
  for (int k = -kmax; k <= kmax; ++k) {
    if (!in_band(K, k)) continue;
    for (int jj = 0; jj < G; ++jj) {
      int j = nyquist_lo(G) + jj;
      if (!in_band(K, k + j)) continue;
      CMatrix b = block(K, k + j, k);
      for (int g = 0; g < G; ++g) out[k + kmax][g] += b * std::polar(1.0, 2 * M_PI * j * g / double(G));
    }
  }
  return out;
}

SclFamily quantize_family(const SclSymbol& a, const std::vector<double>& epsilons) {
  SclFamily f;
  f.source_symbol = a;
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw ValidationError("eps grid must be decreasing");
    f.epsilons.push_back(epsilons[i]);
    f.operators.push_back(quantize(a, epsilons[i], required_modes(a, epsilons[i])));
  }
  return f;
}

double composition_defect(const SclSymbol& a, const SclSymbol& b, double eps, int N, bool check_band) {
  if (a.rank != b.rank || a.theta_grid != b.theta_grid) throw ValidationError("symbols differ in rank or theta grid");
  const int G = a.theta_grid, r = a.rank;
  auto A = check_band ? quantize(a, eps, N) : quantize_unchecked(a, eps, N);
  auto B = check_band ? quantize(b, eps, N) : quantize_unchecked(b, eps, N);
  const int kmax = static_cast<int>(std::floor(std::max(a.support_radius, b.support_radius) / eps));
  const int lo = nyquist_lo(G), hi = lo + G - 1;
  double worst = 0;
  std::vector<CMatrix> prod(G);
  for (int k = -kmax; k <= kmax; ++k) {
    // (AB)(k + j, k) for the rows the symbol reads
    for (int jj = 0; jj < G; ++jj) {
      int m = k + lo + jj;
      prod[jj] = CMatrix::Zero(r, r);
      if (!in_band(A, m) || !in_band(A, k)) continue;
      for (int l = std::max(-N, k + lo); l <= std::min(N, k + hi); ++l)
        if (m - l >= lo && m - l <= hi) prod[jj] += block(A, m, l) * block(B, l, k);
    }
    for (int g = 0; g < G; ++g) {
      CMatrix s = CMatrix::Zero(r, r);
      for (int jj = 0; jj < G; ++jj) s += prod[jj] * std::polar(1.0, 2 * M_PI * (lo + jj) * g / double(G));
      double th = a.theta_at(g);
      CMatrix ref = a(th, eps * k) * b(th, eps * k);
      worst = std::max(worst, (s - ref).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

std::vector<double> default_eps_grid() { return {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128}; }

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

DefectReport scl_composition_defect(const SclSymbol& a, const SclSymbol& b, const std::vector<double>& eps_grid, int N) {
  if (eps_grid.size() < 4) throw ValidationError("composition defect needs at least 4 eps values");
  DefectReport r;
  for (double eps : eps_grid) {
    int n = N > 0 ? N : std::max(required_modes(a, eps), required_modes(b, eps));
    r.eps.push_back(eps);
    r.N.push_back(n);
    r.defect.push_back(composition_defect(a, b, eps, n));
  }
  bool zero = true;
  for (double d : r.defect) zero = zero && d == 0;
  r.slope = zero ? 0.0 : loglog_slope(r.eps, r.defect);
  return r;
}

std::vector<SclPair> scl_catalog_pairs() {
  auto sc = [](cd v) { return CMatrix::Constant(1, 1, v); };
  auto g1 = [](double th) { return std::cos(2 * M_PI * th) + 0.5 * std::sin(4 * M_PI * th); };
  auto g2 = [](double th) { return std::polar(1.0, 2 * M_PI * th) + 0.3 * std::cos(4 * M_PI * th); };
  std::vector<SclPair> out;
  out.push_back({"gauss*g_gauss", SclSymbol(1, [=](double, double xi) { return sc(std::exp(-xi * xi)); }, 8),
                 SclSymbol(1, [=](double th, double xi) { return sc(g1(th) * std::exp(-xi * xi)); }, 8)});
  SclSymbol a2(1, [=](double th, double xi) { return sc(g1(th) * std::exp(-(xi - 0.5) * (xi - 0.5))); }, 8);
  SclSymbol b2(1, [=](double th, double xi) { return sc(g2(th) * xi * std::exp(-xi * xi / 2)); }, 8);
  out.push_back({"shifted*odd", a2, b2});
  out.push_back({"odd*shifted", b2, a2});
  SclSymbol a3(2,
               [=](double th, double xi) {
                 double e = std::exp(-xi * xi);
                 CMatrix m(2, 2);
                 m << e, g1(th) * e, 0.0, xi * e;
                 return m;
               },
               8);
  SclSymbol b3(2,
               [=](double th, double xi) {
                 CMatrix m(2, 2);
                 m << std::cos(2 * M_PI * th) * std::exp(-xi * xi / 2), 0.0, std::exp(-(xi + 1) * (xi + 1)),
                     g2(th) * std::exp(-xi * xi);
                 return m;
               },
               8);
  out.push_back({"matrix", a3, b3});
  return out;
}

// ---------------------------------------------------------------------------

SclSymbol SclLoopFamily::at(double x) const {
  auto f = a;
  return symbol_of([f, x](double th, double xi) { return f(x, th, xi); }, rank, support_radius, theta_grid);
}

SclLoopFamily su2_bump_family(double xi_scale) {
  SclLoopFamily fam;
  fam.rank = 2;
  fam.support_radius = xi_scale;
  fam.theta_grid = 64;
  fam.a = [xi_scale](double x, double th, double xi) {
    double p[3] = {(x - 0.5) / 0.45, (th - 0.5) / 0.45, xi / xi_scale};
    double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    CMatrix u = CMatrix::Zero(2, 2);
    if (r >= 1) return u;
    double phi = M_PI * (1 - transition_step(2 * r - 1));
    u = (std::cos(phi) - 1) * CMatrix::Identity(2, 2);
    if (r > 0) {
      double n[3] = {p[0] / r, p[1] / r, p[2] / r};
      u += kI * std::sin(phi) * pauli_dot(n);
    }
    return u;
  };
  return fam;
}

OddSclIndex odd_scl_index(const SclLoopFamily& fam, double eps, int x_samples, int N) {
  OddSclIndex r;
  r.eps = eps;
  SclSymbol probe = fam.at(0.5);
  r.N = N > 0 ? N : required_modes(probe, eps);
  const int rank = fam.rank;
  r.min_singular = 1e300;
  for (int s = 0; s < x_samples; ++s) {
    double x = double(s) / x_samples;
    auto a = fam.at(x);
    auto ainv = symbol_of(
        [a, rank](double th, double xi) {
          CMatrix u = CMatrix::Identity(rank, rank) + a(th, xi);
          return CMatrix(u.inverse() - CMatrix::Identity(rank, rank));
        },
        rank, fam.support_radius, fam.theta_grid);
    auto f = fam.a;
    auto da = symbol_of(
        [f, x](double th, double xi) { return central_diff([&](double h) { return f(x + h, th, xi); }); }, rank,
        fam.support_radius, fam.theta_grid);
    auto A = quantize(a, eps, r.N), X = quantize(ainv, eps, r.N), dA = quantize(da, eps, r.N);
    CMatrix I = CMatrix::Identity(A.size(), A.size());
    A.matrix += I;
    X.matrix += I;
    int it = 0;
    double res = 0;
    for (;; ++it) {
      CMatrix R = I - cmatmul(A.matrix, X.matrix);
      res = R.allFinite() ? R.cwiseAbs().maxCoeff() : INFINITY;
      if (res < 1e-12) break;
      if (it == 50 || !std::isfinite(res) || res > 1e6) {
        Eigen::BDCSVD<CMatrix> svd(A.matrix);
        std::ostringstream os;
        os << "invertibility not restored at x = " << x << ", eps = " << eps << ": smallest singular value "
           << svd.singularValues().minCoeff() << ", residual " << res;
        throw ValidationError(os.str());
      }
      X.matrix = cmatmul(X.matrix, I + R);
    }
    r.max_iterations = std::max(r.max_iterations, it);
    r.max_residual = std::max(r.max_residual, res);
    r.x.push_back(x);
    r.A.push_back(A);
    r.Ainv.push_back(X);
    r.dA.push_back(dA);
  }
  for (auto& A : r.A) {
    Eigen::BDCSVD<CMatrix> svd(A.matrix);
    r.min_singular = std::min(r.min_singular, svd.singularValues().minCoeff());
  }
  return r;
}

double odd_scl_pairing(const OddSclIndex& r) {
  double sum = 0;
  auto c = LocalConnection::flat(1);
  for (std::size_t s = 0; s < r.A.size(); ++s) {
    CMatrix D = CMatrix::Zero(r.A[s].size(), r.A[s].size());
    auto w = odd_chern_point(r.A[s].matrix, {r.dA[s].matrix}, c, D, 2);
    sum += w[1].real();
  }
  return sum / r.A.size();
}

double odd_symbol_pairing(const SclLoopFamily& fam, int points) {
  const int rank = fam.rank;
  const double L = fam.support_radius, hx = 1.0 / points, hxi = 2 * L / points;
  auto c = LocalConnection::flat(3);
  CMatrix D = CMatrix::Zero(rank, rank), I = CMatrix::Identity(rank, rank);
  auto U = [&](double x, double th, double xi) { return CMatrix(I + fam.a(x, th, xi)); };
  double sum = 0;
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j)
      for (int k = 1; k < points; ++k) {
        double x = i * hx, th = j * hx, xi = -L + k * hxi;
        CMatrix u = U(x, th, xi);
        if ((u - I).cwiseAbs().maxCoeff() == 0) continue;
        std::vector<CMatrix> du{central_diff([&](double h) { return U(x + h, th, xi); }),
                                central_diff([&](double h) { return U(x, th + h, xi); }),
                                central_diff([&](double h) { return U(x, th, xi + h); }, kFdStep * L)};
        sum += odd_chern_point(u, du, c, D, 2)[7].real();
      }
  return kSclSign * sum * hx * hx * hxi;
}

// ---------------------------------------------------------------------------

SclSymbol SclSphereFamily::at(const double* P) const {
  auto f = a;
  std::array<double, 3> p{P[0], P[1], P[2]};
  return symbol_of([f, p](double th, double xi) { return f(p.data(), th, xi); }, static_cast<int>(pinf.rows()),
                   support_radius, theta_grid);
}

SclSphereFamily bott_scl_family(double xi_scale) {
  SclSphereFamily fam;
  fam.support_radius = xi_scale;
  fam.theta_grid = 16;
  CMatrix pi = CMatrix::Zero(2, 2);
  pi(0, 0) = 1;
  fam.pinf = Eigen::kroneckerProduct(CMatrix::Identity(2, 2), pi);
  fam.a = [xi_scale, pi](const double* P, double th, double xi) {
    auto y = sphere_point(P);
    CMatrix e = 0.5 * (CMatrix::Identity(2, 2) + pauli_dot(y.data()));
    cd z((th - 0.5) / 0.45, xi / xi_scale);
    double r = std::abs(z);
    CMatrix q = pi;
    if (r < 1) {
      double phi = 0.5 * M_PI * (1 - transition_step(2 * r - 1));
      Eigen::Vector2cd v(std::cos(phi), r > 0 ? z / r * std::sin(phi) : cd(0));
      q = v * v.adjoint();
    }
    return CMatrix(Eigen::kroneckerProduct(e, q - pi));
  };
  return fam;
}

EvenSclPoint even_scl_index(const SclSphereFamily& fam, int patch, const double* P, double eps, int N) {
  auto a = fam.at(P);
  if (N <= 0) N = required_modes(a, eps);
  const int rank = a.rank;
  CMatrix pinf_band = Eigen::kroneckerProduct(CMatrix::Identity(2 * N + 1, 2 * N + 1), fam.pinf);
  CMatrix Pq = quantize(a, eps, N).matrix + pinf_band;
  Eigen::ComplexEigenSolver<CMatrix> es(Pq, false);
  EvenSclPoint r;
  r.separation = 1e300;
  for (auto l : es.eigenvalues()) r.separation = std::min(r.separation, std::abs(l.real() - 0.5));
  if (r.separation < 0.1) {
    std::ostringstream os;
    os << "spectrum of the quantized projection is within " << r.separation << " of 1/2";
    throw ValidationError(os.str());
  }
  std::vector<CMatrix> dP;
  auto t = TwistedGeometry::tangent_axes(patch);
  for (int i = 0; i < 2; ++i) {
    auto f = fam.a;
    std::array<double, 3> p{P[0], P[1], P[2]};
    int ax = t[i];
    auto da = symbol_of(
        [f, p, ax](double th, double xi) {
          return central_diff([&](double h) {
            auto q = p;
            q[ax] += h;
            return f(q.data(), th, xi);
          });
        },
        rank, fam.support_radius, fam.theta_grid);
    dP.push_back(quantize(da, eps, N).matrix);
  }
  // Newton iteration for sign(2P - 1) and its derivative; (1 + sign) / 2 is the
  // contour integral around the eigenvalues with Re > 1/2.
  const int n = static_cast<int>(Pq.rows());
  CMatrix I = CMatrix::Identity(n, n), S = 2 * Pq - I;
  std::vector<CMatrix> dS{2 * dP[0], 2 * dP[1]};
  for (int it = 0, last = 0;; ++it) {
    CMatrix Si = S.partialPivLu().inverse();
    for (auto& d : dS) d = 0.5 * (d - cmatmul(Si, cmatmul(d, Si)));
    CMatrix next = 0.5 * (S + Si);
    double step = (next - S).cwiseAbs().maxCoeff();
    S = next;
    if (last) break;
    last = step < 1e-8;  // quadratic convergence: one more step reaches roundoff
    if (it == 60) throw ValidationError("sign iteration for the projection did not converge");
  }
  r.E = 0.5 * (I + S);
  r.E0 = pinf_band;
  r.idempotency_residual = (cmatmul(r.E, r.E) - r.E).cwiseAbs().maxCoeff();
  for (auto& d : dS) r.dE.push_back(0.5 * d);
  return r;
}

SpherePairing even_scl_pairing(const SclSphereFamily& fam, double eps, int n, int q) {
  return pair_on_sphere(
      [&](int patch, const double* p) {
        auto e = even_scl_index(fam, patch, p + 1, eps);
        std::vector<CMatrix> de{CMatrix::Zero(e.E.rows(), e.E.cols()), e.dE[0], e.dE[1]};
        return even_chern_point(e.E, de, e.E0, LocalConnection::flat(3), CMatrix::Zero(e.E.rows(), e.E.cols()));
      },
      n, q);
}

SpherePairing even_symbol_pairing(const SclSphereFamily& fam, int n, int q, int points) {
  const double L = fam.support_radius, hth = 1.0 / points, hxi = 2 * L / points;
  // int ch1 of q over (theta, xi): the symbol on the fibre over the north pole
  // restricted to the e_y block.
  double P0[3] = {0, 0, 1};
  const int r = static_cast<int>(fam.pinf.rows());
  auto block_q = [&](double th, double xi) {
    CMatrix full = fam.pinf + fam.a(P0, th, xi);
    return CMatrix(full.topLeftCorner(r / 2, r / 2));
  };
  CMatrix pi = fam.pinf.bottomRightCorner(r / 2, r / 2);
  auto c2 = LocalConnection::flat(2);
  CMatrix Z = CMatrix::Zero(r / 2, r / 2);
  double fiber = 0;
  for (int i = 0; i < points; ++i)
    for (int k = 1; k < points; ++k) {
      double th = i * hth, xi = -L + k * hxi;
      std::vector<CMatrix> dq{central_diff([&](double h) { return block_q(th + h, xi); }),
                              central_diff([&](double h) { return block_q(th, xi + h); }, kFdStep * L)};
      fiber += even_chern_point(block_q(th, xi), dq, pi, c2, Z)[3].real();
    }
  fiber *= kSclSign * hth * hxi;
  CMatrix e0 = CMatrix::Zero(2, 2);
  e0(0, 0) = 1;
  auto base = pair_on_sphere(
      [&](int patch, const double* p) {
        auto t = TwistedGeometry::tangent_axes(patch);
        auto ey = [](const double* P) {
          auto y = sphere_point(P);
          return CMatrix(0.5 * (CMatrix::Identity(2, 2) + pauli_dot(y.data())));
        };
        std::vector<CMatrix> de{CMatrix::Zero(2, 2)};
        for (int i = 0; i < 2; ++i)
          de.push_back(central_diff([&](double h) {
            double P[3] = {p[1], p[2], p[3]};
            P[t[i]] += h;
            return ey(P);
          }));
        return even_chern_point(ey(p + 1), de, e0, LocalConnection::flat(3), CMatrix::Zero(2, 2));
      },
      n, q);
  SpherePairing s;
  s.degree0 = fiber;  // rank e_y = 1
  s.degree2 = base.degree2 * fiber;
  return s;
}

// ---------------------------------------------------------------------------

ThomCheck thom_point(int N, double eps) {
  if (N < 2) throw ValidationError("Hermite truncation needs N >= 2");
  if (!(eps > 0 && eps < 1)) throw ValidationError("eps must lie in (0, 1)");
  ThomCheck r;
  r.eps = eps;
  r.N = N;
  // squeezed ground state c_{n+1} = -t sqrt(n / (n + 1)) c_{n-1}, total mass 1 / sqrt(1 - t^2)
  const double t = (1 - eps) / (1 + eps);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(N + 1);
  c[0] = 1;
  for (int n = 1; n + 1 <= N; n += 2) c[n + 1] = -t * std::sqrt(double(n) / (n + 1)) * c[n - 1];
  r.ground_mass = c.squaredNorm() * std::sqrt(1 - t * t);
  if (r.ground_mass < 1 - 1e-8) {
    std::ostringstream os;
    os << "Hermite truncation N = " << N << " holds ground-state mass " << r.ground_mass << " at eps = " << eps;
    throw ValidationError(os.str());
  }
  CMatrix Z = CMatrix::Zero(N, N + 1);
  for (int n = 1; n <= N; ++n) Z(n - 1, n) = (1 + eps) * std::sqrt(n / 2.0);
  for (int n = 0; n + 1 <= N - 1; ++n) Z(n + 1, n) = (1 - eps) * std::sqrt((n + 1) / 2.0);
  auto d = index_data(Z);
  r.index = d.index();
  r.trace = d.trace;
  r.idempotency_residual = d.idempotency_residual;
  r.ground_trace = d.S0.trace().real();
  Eigen::VectorXcd g = c.normalized().cast<cd>();
  r.ground_overlap = (g.adjoint() * d.S0 * g)(0, 0).real();
  return r;
}

int thom_isotropic_check(int N, const std::vector<double>& eps_grid, std::vector<ThomCheck>* detail) {
  if (eps_grid.empty()) throw ValidationError("empty eps grid");
  int index = 0;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    auto r = thom_point(N, eps_grid[i]);
    if (std::abs(r.trace.real() + r.index) > 1e-9 || r.idempotency_residual > 1e-10)
      throw ValidationError("index idempotent of the Bott operator is not exact");
    if (i == 0) index = r.index;
    else if (r.index != index) throw ValidationError("Bott index changes along the eps grid");
    if (detail) detail->push_back(r);
  }
  return index;
}

}  // namespace tk
