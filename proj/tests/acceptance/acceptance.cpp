// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include "tk/cech.hpp"
#include "tk/cherncalc.hpp"
#include "tk/fiberops.hpp"
#include "tk/sclquant.hpp"
#include "tk/series.hpp"
#include "tk/twistedderham.hpp"

#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>

using namespace tk;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double lsq_slope(const std::vector<double>& h, const std::vector<double>& r) { return loglog_slope(h, r); }

Outcome grr() {
  auto g = grr_check(4);
  bool ok = g.todd[0] == 1 && g.todd[1] == Rational(1, 2) && g.todd[2] == Rational(1, 12) &&
            g.degree4_coefficient == Rational(13, 12) && g.line_coefficient == 13;
  return {ok, fmt::format("todd ({}, {}, {}), degree 4 {}, c1(L) = {} e1", to_string(g.todd[0]), to_string(g.todd[1]),
                          to_string(g.todd[2]), to_string(g.degree4_coefficient), to_string(g.line_coefficient))};
}

Outcome dd_class() {
  auto n = catalog_nerve(ManifoldTag::CircleTimesSphere2);
  auto u = winding_map(n, 1);
  auto c = sphere_line_bundle_cocycle(n, 1);
  auto delta = bockstein(dd_cocycle(u, c, n), n);
  auto ab = cup(u.transitions, bockstein(c, n), n);
  auto coord = pair_with_cycle(delta, fundamental_cycle(n));
  bool same = class_coordinates(delta, n) == class_coordinates(ab, n);
  return {std::llabs(coord) == 1 && same, fmt::format("class coordinate {}, bockstein class == cup class: {}", coord, same)};
}

Outcome primitivity_curvature() {
  std::vector<double> h, dmu, F;
  long transition = 0;
  double worst_time = 0;
  for (int n : {4, 8, 16}) {
    auto t0 = std::chrono::steady_clock::now();
    auto L = std::make_shared<const HermitianLineBundle>(make_line_bundle(
        std::make_shared<const ProductMesh>(std::vector<Factor>{circle_grid(2 * n), cube_sphere(n)}), 1));
    auto tot = build_circle_bundle(L, 8);
    auto J = build_primitive_bundle(tot, 1, 0.25);
    auto p = check_primitivity(J, 2000, 1);
    auto c = curvature_report(J, 3);
    transition = std::max({transition, std::labs(p.transition_defect), std::labs(p.associativity_defect)});
    h.push_back(c.h);
    dmu.push_back(c.dmu_residual);
    F.push_back(c.F_residual);
    worst_time = std::max(worst_time, seconds_since(t0));
  }
  double sd = lsq_slope(h, dmu), sf = lsq_slope(h, F);
  return {transition == 0 && sd >= 1.5 && sf >= 1.5 && worst_time < 60,
          fmt::format("transition defect {}, dmu slope {:.3f} ({:.2e} at n=16), F slope {:.3f} ({:.2e}), slowest refinement {:.1f} s",
                      transition, sd, dmu.back(), sf, F.back(), worst_time)};
}

Outcome twisted_dims() {
  std::vector<std::array<int, 4>> dims;
  bool exact_shift = true;
  for (int r : {1, 2}) {
    auto s = make_scenario(8 * r, r, 1, 1, 0.0);
    auto h0 = twisted_cohomology_dims(s.base, zero_twist(s.base));
    auto h1 = twisted_cohomology_dims(s.base, s.twist);
    if (h0.ambiguous || h1.ambiguous) return {false, fmt::format("ambiguous spectral gap at r = {}", r)};
    dims.push_back({h0.even_dim, h0.odd_dim, h1.even_dim, h1.odd_dim});
    std::mt19937 rng(r);
    std::uniform_real_distribution<double> U(-1, 1);
    Eigen::VectorXd v(s.base->count(2));
    for (auto& x : v) x = U(rng);
    auto eta = d(DiscreteForm::homogeneous(s.base, 2, v));
    auto h2 = twisted_cohomology_dims(s.base, make_twist(s.twist.delta_bar + eta));
    auto h3 = twisted_cohomology_dims(s.base, make_twist(eta));
    exact_shift = exact_shift && h2.even_dim == h1.even_dim && h2.odd_dim == h1.odd_dim && h3.even_dim == h0.even_dim &&
                  h3.odd_dim == h0.odd_dim;
  }
  bool ok = dims[0] == std::array<int, 4>{2, 2, 1, 1} && dims[1] == dims[0] && exact_shift;
  return {ok, fmt::format("untwisted ({},{}) / ({},{}), twisted ({},{}) / ({},{}) at r = 1 / 2, exact-form invariance: {}",
                          dims[0][0], dims[0][1], dims[1][0], dims[1][1], dims[0][2], dims[0][3], dims[1][2], dims[1][3],
                          exact_shift)};
}

Outcome idempotent_index() {
  double idem = 0, integrality = 0;
  for (unsigned s = 1; s <= 100; ++s) {
    std::mt19937 rng(s);
    std::uniform_int_distribution<int> dim(2, 12);
    std::normal_distribution<double> g;
    int rows = dim(rng), cols = dim(rng);
    CMatrix P(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) P(i, j) = cd(g(rng), g(rng));
    if (s % 3 == 0 && cols > 1) P.col(0) = P.col(1);
    auto r = index_data(P);
    idem = std::max(idem, (r.E1 * r.E1 - r.E1).cwiseAbs().maxCoeff());
    integrality = std::max(integrality, std::abs(r.trace - std::round(r.trace.real())));
  }
  double hardy = 0;
  for (int k : {0, 1, 2})
    hardy = std::max(hardy, std::abs(std::abs(index_data(toeplitz(winding_symbol(k, 0.3), 24, k)).trace) - k));
  return {idem <= 1e-12 && integrality <= 1e-9 && hardy <= 1e-9,
          fmt::format("max |E1^2 - E1| {:.1e}, max trace distance to Z {:.1e}, Toeplitz k=0,1,2 max ||trace|-k| {:.1e}", idem,
                      integrality, hardy)};
}

Outcome chern_structure() {
  auto g = TwistedGeometry::make(1, 1, 0.3);
  UnitaryFamily A;
  OddChernSettings s;
  s.patch = 4;
  s.fiber_points = 3;
  std::vector<double> h, clo, sub, fac;
  for (int n : {4, 8, 16}) {
    s.M = s.n = n;
    auto r = odd_chern(A, g, s);
    h.push_back(r.h);
    clo.push_back(r.ch.closedness_residual);
    sub.push_back(r.ch.subcomplex_residual);
    fac.push_back(r.ch.factorization_residual);
  }
  double sc = lsq_slope(h, clo), ss = lsq_slope(h, sub), sf = lsq_slope(h, fac);
  double deck = deck_shift_defect(A, g, 6, 3);
  return {sc >= 1.5 && ss >= 1.5 && sf >= 1.5 && deck <= 1e-10,
          fmt::format("slopes closedness {:.3f}, subcomplex {:.3f}, factorization {:.3f}; deck-shift defect {:.1e}", sc, ss,
                      sf, deck)};
}

Outcome bott_index() {
  auto c = compare_bott_index(4, 6);
  double a = c.analytic.degree2, t = c.topological.degree2;
  bool ok = std::abs(a - t) <= 1e-6 && std::abs(std::abs(a) - 1) <= 1e-6 && std::abs(std::abs(t) - 1) <= 1e-6;
  return {ok, fmt::format("analytic {:.9f}, topological {:.9f}, difference {:.1e}", a, t, c.difference)};
}

Outcome twisted_index() {
  auto c = compare_twisted_index(16, 2, 4);
  return {c.projection_norm <= 1e-4,
          fmt::format("harmonic projection of the difference {:.2e} (analytic {:.6f}, topological {:.6f}, dims ({},{}))",
                      c.projection_norm, c.analytic_coordinate, c.topological_coordinate, c.dims.even_dim, c.dims.odd_dim)};
}

Outcome semiclassical() {
  double worst_slope = 1e300, roundtrip = 0;
  for (auto& p : scl_catalog_pairs()) {
    worst_slope = std::min(worst_slope, scl_composition_defect(p.a, p.b).slope);
    for (auto* s : {&p.a, &p.b}) {
      const double eps = 1.0 / 16;
      int N = required_modes(*s, eps), kmax = N - s->theta_grid / 2;
      auto sig = scl_symbol(quantize(*s, eps, N), s->theta_grid, kmax);
      for (int k = -kmax; k <= kmax; ++k)
        for (int g = 0; g < s->theta_grid; ++g)
          roundtrip = std::max(roundtrip, (sig[k + kmax][g] - (*s)(s->theta_at(g), eps * k)).cwiseAbs().maxCoeff());
    }
  }
  auto fam = su2_bump_family();
  double symbol = odd_symbol_pairing(fam, 48), pairing_err = 0;
  std::string pairs;
  for (double eps : {0.5, 0.25}) {
    double a = odd_scl_pairing(odd_scl_index(fam, eps, 32));
    pairing_err = std::max(pairing_err, std::abs(a - symbol));
    pairs += fmt::format(" {:.8f} (eps {})", a, eps);
  }
  return {worst_slope >= 0.9 && roundtrip <= 1e-13 && pairing_err <= 1e-5,
          fmt::format("min defect slope {:.3f}, symbol roundtrip {:.1e}, odd pairings{} vs symbol {:.8f}", worst_slope,
                      roundtrip, pairs, symbol)};
}

Outcome thom() {
  int a = thom_isotropic_check(64, {0.5, 0.25}), b = thom_isotropic_check(128, {0.5, 0.25});
  return {a == 1 && b == 1, fmt::format("index {} at N = 64, {} at N = 128", a, b)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "GRR exactness", 1, grr},
      {2, "Dixmier-Douady class", 10, dd_class},
      {3, "primitivity and curvature", 180, primitivity_curvature},
      {4, "twisted de Rham dimensions", 120, twisted_dims},
      {5, "idempotent index", 10, idempotent_index},
      {6, "Chern character structure", 120, chern_structure},
      {7, "untwisted index theorem", 300, bott_index},
      {8, "twisted index theorem", 600, twisted_index},
      {9, "semiclassical calculus", 300, semiclassical},
      {10, "Thom/Bott check", 60, thom},
  };
  int failures = 0;
  for (auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double t = seconds_since(t0);
    bool pass = o.pass && t < c.budget_s;
    failures += !pass;
    fmt::print("criterion {:2d} {}: {} | {} | {:.2f} s (budget {:.0f} s)\n", c.id, pass ? "PASS" : "FAIL", c.name, o.detail,
               t, c.budget_s);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
