#include "doctest.h"
#include "tk/cech.hpp"

#include <random>

using namespace tk;

namespace {

CechCochain random_cochain(const Nerve& n, int k, Coefficients c, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> I(-3, 3);
  std::uniform_real_distribution<double> R(-2, 2);
  auto z = CechCochain::zero(n, k, c);
  for (auto& v : z.values) {
    if (c == Coefficients::Integer) {
      double x = I(rng);
      for (auto& s : v) s = x;
    } else {
      for (auto& s : v) s = R(rng);
    }
  }
  return z;
}

// integer 1-cocycle pulled back from the three-arc circle generator on factor f
CechCochain circle_generator(const Nerve& n, int f) {
  auto z = CechCochain::zero(n, 1, Coefficients::Integer);
  for (int e = 0; e < n.count(1); ++e) {
    const auto& s = n.simplices[1][e];
    int a = n.factor_vertex[s[0]][f], b = n.factor_vertex[s[1]][f];
    double v = (a == 0 && b == 2) ? -1.0 : 0.0;
    for (auto& x : z.values[e]) x = v;
  }
  return z;
}

int betti(const Nerve& n, int k) { return cohomology(n, k, Coefficients::Integer).free_rank; }

}  // namespace

TEST_CASE("catalog nerves are well formed") {
  auto s12 = catalog_nerve(ManifoldTag::CircleTimesSphere2);
  CHECK(s12.vertex_count == 12);
  CHECK(s12.count(3) == 36);
  CHECK(s12.maximal().size() == 36);
  CHECK(catalog_nerve(ManifoldTag::Torus3).count(3) == 162);
  CHECK(octahedral_nerve().count(2) == 8);
  CHECK_THROWS_AS(CechCochain::zero(circle_nerve(), 2, Coefficients::Integer), StructuralError);
}

TEST_CASE("coboundary squares to zero on every nerve and coefficient group") {
  for (auto tag : {ManifoldTag::Circle, ManifoldTag::Sphere2, ManifoldTag::Torus2,
                   ManifoldTag::CircleTimesSphere2, ManifoldTag::Torus3}) {
    auto n = catalog_nerve(tag);
    for (auto c : {Coefficients::Integer, Coefficients::Real, Coefficients::Circle})
      for (int k = 0; k + 2 <= n.top_degree(); ++k) {
        auto z = random_cochain(n, k, c, 17u + k);
        auto dd = coboundary(coboundary(z, n), n);
        for (auto& v : dd.values)
          for (double x : v) CHECK(std::abs(x) <= 1e-12);
      }
  }
}

TEST_CASE("circle nerve coboundary is the hand expansion") {
  auto n = circle_nerve();
  auto f = CechCochain::constant(n, 0, Coefficients::Integer, {5, 7, 11});
  auto d = coboundary(f, n);
  // edges sorted as (0,1), (0,2), (1,2); value f_k - f_j
  CHECK(d.integer_value(n.index_of({0, 1})) == 2);
  CHECK(d.integer_value(n.index_of({0, 2})) == 6);
  CHECK(d.integer_value(n.index_of({1, 2})) == 4);
}

TEST_CASE("smith normal form reproduces the matrix") {
  auto n = catalog_nerve(ManifoldTag::CircleTimesSphere2);
  for (int k = 0; k < 3; ++k) {
    IntMatrix a = coboundary_matrix(n, k);
    auto sf = smith_normal_form(a);
    IntMatrix d = sf.U * a * sf.V;
    for (int i = 0; i < d.rows(); ++i)
      for (int j = 0; j < d.cols(); ++j) {
        std::int64_t expect = (i == j && i < static_cast<int>(sf.diagonal.size())) ? sf.diagonal[i] : 0;
        CHECK(d(i, j) == expect);
      }
    CHECK((sf.V * sf.Vinv - IntMatrix::Identity(a.cols(), a.cols())).cwiseAbs().maxCoeff() == 0);
  }
}

TEST_CASE("integer cohomology of the catalog matches real ranks") {
  CHECK(cohomology(single_patch_nerve(), 0, Coefficients::Integer).free_rank == 1);
  CHECK(cohomology(single_patch_nerve(), 1, Coefficients::Integer).free_rank == 0);
  auto sphere = sphere_nerve();
  CHECK(cohomology(sphere, 2, Coefficients::Integer) == CohomologyGroup{1, {}});
  CHECK(cohomology(sphere, 1, Coefficients::Integer) == CohomologyGroup{0, {}});
  CHECK(cohomology(octahedral_nerve(), 2, Coefficients::Integer) == CohomologyGroup{1, {}});
  CHECK(cohomology(circle_nerve(), 1, Coefficients::Integer).free_rank == 1);
  auto s12 = catalog_nerve(ManifoldTag::CircleTimesSphere2);
  for (int k = 0; k <= 3; ++k) CHECK(betti(s12, k) == 1);
  auto t3 = catalog_nerve(ManifoldTag::Torus3);
  int expect[4] = {1, 3, 3, 1};
  for (int k = 0; k <= 3; ++k) {
    CHECK(betti(t3, k) == expect[k]);
    CHECK(cohomology(t3, k, Coefficients::Real).free_rank == expect[k]);
    CHECK(cohomology(t3, k, Coefficients::Integer).torsion.empty());
  }
  CHECK(cohomology(s12, 1, Coefficients::Circle).free_rank == 1);
}

TEST_CASE("class coordinates are linear and vanish on coboundaries") {
  auto n = catalog_nerve(ManifoldTag::Torus2);
  auto g = circle_generator(n, 0);
  auto c1 = class_coordinates(g, n);
  auto c2 = class_coordinates(scale(g, 2), n);
  CHECK(c2 == 2 * c1);
  auto f = random_cochain(n, 0, Coefficients::Integer, 3);
  auto df = coboundary(f, n);
  CHECK(class_coordinates(df, n).cwiseAbs().sum() == 0);
  CHECK(class_coordinates(add(g, df), n) == c1);
  auto bad = CechCochain::constant(n, 1, Coefficients::Integer, std::vector<double>(n.count(1), 0.0));
  bad.values[0].assign(bad.values[0].size(), 1.0);
  CHECK_THROWS_AS(class_coordinates(bad, n), ValidationError);
}

TEST_CASE("cup of 1-cocycles is graded commutative on the torus") {
  auto n = catalog_nerve(ManifoldTag::Torus2);
  auto a = circle_generator(n, 0), b = circle_generator(n, 1);
  auto ab = cup(a, b, n), ba = cup(b, a, n);
  CHECK(is_cocycle(ab, n));
  auto cab = class_coordinates(ab, n), cba = class_coordinates(ba, n);
  CHECK(cab.cwiseAbs().sum() == 1);
  CHECK(cab == -cba);
  auto z = CechCochain::zero(n, 1, Coefficients::Integer);
  CHECK(class_coordinates(cup(a, z, n), n).cwiseAbs().sum() == 0);
}

TEST_CASE("cup of circle and sphere generators generates H3 of S1xS2") {
  auto n = catalog_nerve(ManifoldTag::CircleTimesSphere2);
  auto u = winding_map(n, 1);
  auto c = sphere_line_bundle_cocycle(n, 1);
  CHECK(is_cocycle(c, n));
  auto beta = bockstein(c, n);
  auto alpha = u.transitions;
  auto ab = cup(alpha, beta, n);
  CHECK(is_cocycle(ab, n));
  auto fc = fundamental_cycle(n);
  CHECK(std::llabs(pair_with_cycle(ab, fc)) == 1);
  CHECK(class_coordinates(ab, n).cwiseAbs().sum() == 1);
  // the sphere class alone is a generator of H2 of the sphere nerve
  auto sn = sphere_nerve();
  auto bs = bockstein(sphere_line_bundle_cocycle(sn, 1), sn);
  CHECK(std::llabs(pair_with_cycle(bs, fundamental_cycle(sn))) == 1);
  auto b3 = bockstein(sphere_line_bundle_cocycle(sn, 3), sn);
  CHECK(std::llabs(pair_with_cycle(b3, fundamental_cycle(sn))) == 3);
}

TEST_CASE("Dixmier-Douady cocycle: bockstein equals the cup product class") {
  auto n = catalog_nerve(ManifoldTag::CircleTimesSphere2);
  auto u = winding_map(n, 1);
  auto c = sphere_line_bundle_cocycle(n, 1);
  auto d = dd_cocycle(u, c, n);
  CHECK(is_cocycle(d, n));
  auto delta = bockstein(d, n);
  auto ab = cup(u.transitions, bockstein(c, n), n);
  auto cd = class_coordinates(delta, n);
  CHECK(cd == class_coordinates(ab, n));
  CHECK(cd.cwiseAbs().sum() == 1);

  SUBCASE("invariant under rebranching u") {
    auto u2 = rebranch(rebranch(u, n, 4, 1), n, 9, -2);
    CHECK(class_coordinates(bockstein(dd_cocycle(u2, c, n), n), n) == cd);
  }
  SUBCASE("invariant under a coboundary change of c") {
    auto c2 = twist_by_coboundary(c, n, 99);
    CHECK(class_coordinates(bockstein(dd_cocycle(u, c2, n), n), n) == cd);
  }
  SUBCASE("trivial data give a trivial class") {
    auto u0 = winding_map(n, 0);
    auto d0 = dd_cocycle(u0, c, n);
    for (auto& v : d0.values)
      for (double x : v) CHECK(x == 0.0);
    auto c0 = CechCochain::zero(n, 1, Coefficients::Circle);
    CHECK(class_coordinates(bockstein(dd_cocycle(u, c0, n), n), n).cwiseAbs().sum() == 0);
  }
  SUBCASE("winding and degree multiply") {
    auto d6 = dd_cocycle(winding_map(n, 2), sphere_line_bundle_cocycle(n, 3), n);
    CHECK(class_coordinates(bockstein(d6, n), n) == 6 * cd);
  }
}

TEST_CASE("non-cocycle inputs are rejected") {
  auto n = catalog_nerve(ManifoldTag::CircleTimesSphere2);
  auto u = winding_map(n, 1);
  auto c = sphere_line_bundle_cocycle(n, 1);
  c.values[0][0] += 0.25;
  CHECK_THROWS_AS(dd_cocycle(u, c, n), ValidationError);
  auto bad = u;
  bad.local_lifts[0][0] += Rational(1, 3);
  CHECK_THROWS_AS(bad.validate(n), ValidationError);
}

TEST_CASE("json interchange lists simplices and cochains") {
  auto n = circle_nerve();
  auto z = CechCochain::constant(n, 1, Coefficients::Integer, {1, 0, -2});
  auto j = to_json(n, {z});
  CHECK(j["vertices"] == 3);
  CHECK(j["simplices"]["1"].size() == 3);
  CHECK(j["cochains"][0]["coeff"] == "Z");
  CHECK(j["cochains"][0]["values"]["0,2"] == 0);
}
