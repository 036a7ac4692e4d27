#include <doctest.h>

#include <cmath>

#include "gelk/error.hpp"
#include "gelk/irg.hpp"
#include "gelk/model_io.hpp"
#include "gelk/survival.hpp"
#include "gelk/union_find.hpp"
#include "support/oracles.hpp"

using namespace gelk;

namespace {

TypeVector mass(double m) { return TypeVector{1, Vector::Constant(1, m), Vector(0)}; }

std::vector<TypeVector> monomers(std::size_t n) { return std::vector<TypeVector>(n, mass(1.0)); }

}  // namespace

TEST_CASE("identical Kac velocities never connect") {
  const Model kac = kac_gaussian(3);
  TypeVector v = kac.measure.atoms()[4].x;
  const GraphRealization g = sample_graph(kac.system, std::vector<TypeVector>(50, v), 1.0, 100.0, 1);
  CHECK(g.edges.empty());
}

TEST_CASE("edge probability between two vertices") {
  const Model m = multiplicative_monodisperse();
  const double t = 0.7, scale = 2.0;
  int hits = 0;
  const int runs = 20000;
  for (int s = 0; s < runs; ++s) {
    const GraphRealization g = sample_graph(m.system, {mass(1.0), mass(3.0)}, scale, t, s);
    hits += static_cast<int>(g.edges.size());
  }
  const double p = 1.0 - std::exp(-t * 3.0 / scale);
  CHECK(std::abs(hits / double(runs) - p) < 5 * std::sqrt(p * (1 - p) / runs));
}

TEST_CASE("edge count of the Erdos-Renyi graph") {
  const Model m = multiplicative_monodisperse();
  const std::size_t n = 2000;
  const double t = 1.3;
  const GraphRealization g = sample_graph(m.system, monomers(n), double(n), t, 5);
  const double pairs = n * (n - 1) / 2.0;
  const double p = 1.0 - std::exp(-t / n);
  CHECK(std::abs(g.edges.size() - pairs * p) < 5 * std::sqrt(pairs * p));
  for (std::size_t k = 1; k < g.edges.size(); ++k) CHECK(g.edges[k - 1].t <= g.edges[k].t);
  for (const Edge& e : g.edges) CHECK(e.i < e.j);
}

TEST_CASE("giant component fraction and bracketing around t_g") {
  const Model m = multiplicative_monodisperse();
  const std::size_t n = 10000;
  const GraphRealization g = sample_graph(m.system, monomers(n), double(n), 2.0, 8);
  const auto cps = trajectory(g, {0.9, 1.1, 2.0}, std::ceil(std::sqrt(n)));
  CHECK(cps[0].c1_over_n < 0.02);
  CHECK(cps[1].c1_over_n > 0.05);
  CHECK(std::abs(cps[2].c1_over_n - oracle::giant_fraction(2.0)) < 0.03);
  CHECK(cps[2].meso_sum < 0.05);
  CHECK(cps[2].pi_c1[0] == doctest::Approx(cps[2].c1_over_n));
  for (std::size_t k = 1; k < cps.size(); ++k) CHECK(cps[k].c1 >= cps[k - 1].c1);
  std::size_t vertices = 0;
  for (const auto& [size, count] : cps[2].histogram) vertices += size * count;
  CHECK(vertices == n);
}

TEST_CASE("components agree with a direct union-find") {
  const Model m = two_atom_multiplicative();
  std::vector<TypeVector> vs;
  for (int k = 0; k < 300; ++k) vs.push_back(mass(k % 2 ? 2.0 : 1.0));
  const GraphRealization g = sample_graph(m.system, vs, 300.0, 0.6, 17);
  UnionFind uf(vs.size());
  for (const Edge& e : g.edges) {
    if (e.t <= 0.5) uf.unite(e.i, e.j);
  }
  std::size_t largest = 0;
  for (std::size_t v = 0; v < vs.size(); ++v) largest = std::max(largest, uf.component_size(v));
  const auto cps = trajectory(g, {0.5}, 18.0);
  CHECK(cps[0].c1 == largest);
  CHECK(cps[0].n_components == uf.components());
  CHECK_THROWS_AS(trajectory(g, {0.7}, 18.0), InvalidArgument);
}

TEST_CASE("vertex budget") {
  const Model m = multiplicative_monodisperse();
  IrgOptions opts;
  opts.max_vertices = 10;
  CHECK_THROWS_AS(sample_graph(m.system, monomers(11), 11.0, 1.0, 1, opts), BudgetExceeded);
}

TEST_CASE("coupling at time zero") {
  const Model m = multiplicative_monodisperse();
  const CouplingReport r = coupling_test(m.system, m.system, m.measure, 200.0, 0.0, 50, 3, 1e-3, 2);
  CHECK(r.pass);
  CHECK(r.graph_phi.size() == 50);
}

TEST_CASE("duality window and surviving fraction") {
  const Model m = multiplicative_monodisperse();
  CHECK_THROWS_AS(duality_experiment(m.system, m.measure, 1e3, 0.5, 0.7, 1), WindowInvalid);
  CHECK_THROWS_AS(duality_experiment(m.system, m.measure, 1e3, 2.0, 1.5, 1), WindowInvalid);
  const DualityReport r = duality_experiment(m.system, m.measure, 1e4, 2.0, 3.0, 4);
  CHECK(r.dual_t_g > 3.0);
  CHECK(std::abs(r.surviving_fraction - (1.0 - oracle::giant_fraction(2.0))) < 0.03);
  CHECK(r.dual_c1_over_n < 0.05);
  CHECK(r.fresh_c1_over_n < 0.05);
}
