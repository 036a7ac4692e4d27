#include "gelk/irg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "gelk/error.hpp"
#include "gelk/parallel.hpp"
#include "gelk/rng.hpp"
#include "gelk/spectral.hpp"
#include "gelk/stats.hpp"
#include "gelk/stochastic.hpp"
#include "gelk/survival.hpp"
#include "gelk/union_find.hpp"

namespace gelk {

namespace {

bool coords_less(const TypeVector& a, const TypeVector& b) {
  if (a.pi0 != b.pi0) return a.pi0 < b.pi0;
  for (int i = 0; i < a.n(); ++i) {
    if (a.plus[i] != b.plus[i]) return a.plus[i] < b.plus[i];
  }
  for (int i = 0; i < a.m(); ++i) {
    if (a.par[i] != b.par[i]) return a.par[i] < b.par[i];
  }
  return false;
}

// Vertex classes of identical type, members in increasing index order.
std::vector<std::vector<std::uint32_t>> group_vertices(const std::vector<TypeVector>& vertices) {
  std::vector<std::uint32_t> order(vertices.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return coords_less(vertices[a], vertices[b]); });
  std::vector<std::vector<std::uint32_t>> classes;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || coords_less(vertices[order[k - 1]], vertices[order[k]])) classes.emplace_back();
    classes.back().push_back(order[k]);
  }
  return classes;
}

// Index of the largest root: strict maximum by size, ties to the smallest index.
std::size_t largest_root(const UnionFind& uf, const std::vector<char>* alive = nullptr) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::size_t best_size = 0;
  for (std::size_t v = 0; v < uf.size(); ++v) {
    if (alive && !(*alive)[v]) continue;
    if (!uf.is_root(v)) continue;
    if (uf.root_size(v) > best_size) {
      best_size = uf.root_size(v);
      best = v;
    }
  }
  return best;
}

std::vector<double> component_sizes(const GraphRealization& g, double t, const std::vector<char>* alive) {
  UnionFind uf(g.vertices.size());
  for (const Edge& e : g.edges) {
    if (e.t > t) break;
    if (alive && (!(*alive)[e.i] || !(*alive)[e.j])) continue;
    uf.unite(e.i, e.j);
  }
  std::vector<double> sizes;
  for (std::size_t v = 0; v < uf.size(); ++v) {
    if (alive && !(*alive)[v]) continue;
    if (uf.is_root(v)) sizes.push_back(static_cast<double>(uf.root_size(v)));
  }
  return sizes;
}

double phi_of(const Vector& pi, int n) { return pi.head(1 + n).sum(); }

}  // namespace

GraphRealization sample_graph(const BilinearSystem& sys, const std::vector<TypeVector>& vertices, double scale,
                              double t_max, std::uint64_t seed, const IrgOptions& opts) {
  if (vertices.size() > opts.max_vertices) {
    std::ostringstream os;
    os << vertices.size() << " vertices exceed the graph cap of " << opts.max_vertices;
    throw BudgetExceeded(os.str());
  }
  if (!(scale > 0.0)) throw InvalidArgument("scale parameter N must be positive");
  if (!(t_max >= 0.0)) throw InvalidArgument("graph horizon must be nonnegative");
  GraphRealization g;
  g.vertices = vertices;
  g.scale = scale;
  g.horizon = t_max;
  Rng rng(seed);

  const auto classes = group_vertices(vertices);
  for (std::size_t a = 0; a < classes.size(); ++a) {
    for (std::size_t b = a; b < classes.size(); ++b) {
      const auto& ma = classes[a];
      const auto& mb = classes[b];
      const double k = kbar(sys, vertices[ma.front()], vertices[mb.front()]);
      if (k <= 0.0 || t_max == 0.0) continue;
      const double lam = k * t_max / scale;  // P(edge) = 1 - exp(-lam)
      const double p = -std::expm1(-lam);
      const std::uint64_t ca = ma.size(), cb = mb.size();
      const std::uint64_t pairs = (a == b) ? ca * (ca - 1) / 2 : ca * cb;
      // Triangular row bookkeeping for a == b: row r holds pairs (r, s > r).
      std::uint64_t row = 0, row_start = 0;
      auto row_len = [&](std::uint64_t r) { return ca - 1 - r; };
      double pos = -1.0;
      for (;;) {
        pos += 1.0 + std::floor(rng.exponential() / lam);
        if (pos >= static_cast<double>(pairs)) break;
        const auto idx = static_cast<std::uint64_t>(pos);
        std::uint32_t u, v;
        if (a == b) {
          while (idx >= row_start + row_len(row)) {
            row_start += row_len(row);
            ++row;
          }
          u = ma[row];
          v = ma[row + 1 + (idx - row_start)];
        } else {
          u = ma[idx / cb];
          v = mb[idx % cb];
        }
        if (u > v) std::swap(u, v);
        const double tau = -std::log1p(-rng.uniform() * p);
        g.edges.push_back({u, v, tau * scale / k});
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const Edge& x, const Edge& y) {
    if (x.t != y.t) return x.t < y.t;
    return x.i != y.i ? x.i < y.i : x.j < y.j;
  });
  return g;
}

std::vector<ComponentCheckpoint> trajectory(const GraphRealization& graph, const std::vector<double>& checkpoints,
                                            double xi_n) {
  const std::size_t count = graph.vertices.size();
  const int width = count ? 1 + graph.vertices.front().n() + graph.vertices.front().m() : 1;
  std::vector<double> sums(count * static_cast<std::size_t>(width));
  for (std::size_t v = 0; v < count; ++v) {
    const Vector c = graph.vertices[v].coords();
    std::copy(c.data(), c.data() + width, sums.begin() + static_cast<long>(v * width));
  }
  UnionFind uf(count);
  std::vector<double> stops = checkpoints;
  std::sort(stops.begin(), stops.end());
  std::vector<ComponentCheckpoint> out;
  std::size_t next_edge = 0;
  for (double stop : stops) {
    if (stop > graph.horizon) throw InvalidArgument("checkpoint beyond the sampled graph horizon");
    while (next_edge < graph.edges.size() && graph.edges[next_edge].t <= stop) {
      const Edge& e = graph.edges[next_edge++];
      const auto [keep, gone] = uf.unite(e.i, e.j);
      if (keep == gone) continue;
      for (int c = 0; c < width; ++c) sums[keep * width + c] += sums[gone * width + c];
    }
    ComponentCheckpoint cp;
    cp.t = stop;
    cp.n_components = uf.components();
    cp.pi_c1 = Vector::Zero(width);
    const std::size_t best = largest_root(uf);
    for (std::size_t v = 0; v < count; ++v) {
      if (!uf.is_root(v)) continue;
      const std::size_t size = uf.root_size(v);
      ++cp.histogram[size];
      if (v != best && static_cast<double>(size) >= xi_n) cp.meso_sum += static_cast<double>(size);
    }
    if (best < count) {
      cp.c1 = uf.root_size(best);
      cp.pi_c1 = Eigen::Map<const Vector>(sums.data() + best * width, width) / graph.scale;
    }
    cp.c1_over_n = static_cast<double>(cp.c1) / graph.scale;
    cp.meso_sum /= graph.scale;
    out.push_back(std::move(cp));
  }
  return out;
}

CouplingReport coupling_test(const BilinearSystem& sys, const BilinearSystem& particle_sys, const AtomicMeasure& mu,
                             double scale, double t, std::size_t replicas, std::uint64_t seed, double alpha,
                             unsigned threads) {
  if (replicas == 0) throw InvalidArgument("coupling test needs at least one replica");
  if (!(t >= 0.0)) throw InvalidArgument("coupling time must be nonnegative");
  CouplingReport r;
  r.scale = scale;
  r.t = t;
  r.replicas = replicas;
  r.alpha = alpha;
  r.graph_phi.resize(replicas);
  r.particle_phi.resize(replicas);
  r.graph_clusters.resize(replicas);
  r.particle_clusters.resize(replicas);
  const int n = sys.n();
  parallel_for(
      replicas,
      [&](std::size_t k) {
        const std::uint64_t graph_seed = derive_seed(seed, 2 * k);
        Rng vrng(derive_seed(graph_seed, 0));
        const auto vertices = sample_poisson_types(mu, scale, vrng);
        const GraphRealization g = sample_graph(sys, vertices, scale, t, derive_seed(graph_seed, 1));
        const ComponentCheckpoint cp = trajectory(g, {t}, default_xi(scale)).front();
        r.graph_phi[k] = phi_of(cp.pi_c1, n);
        r.graph_clusters[k] = static_cast<double>(cp.n_components);

        ParticleSystem ps = ParticleSystem::init_poisson(particle_sys, mu, scale, derive_seed(seed, 2 * k + 1));
        ps.advance_to(t);
        const Snapshot s = ps.snapshot(default_xi(scale));
        r.particle_phi[k] = phi_of(s.g_largest, n);
        r.particle_clusters[k] = static_cast<double>(s.n_particles);
      },
      threads);
  const KsResult phi = ks_two_sample(r.graph_phi, r.particle_phi);
  const KsResult clusters = ks_two_sample(r.graph_clusters, r.particle_clusters);
  r.ks_phi = phi.statistic;
  r.p_phi = phi.p_value;
  r.ks_clusters = clusters.statistic;
  r.p_clusters = clusters.p_value;
  r.pass = r.p_phi >= alpha && r.p_clusters >= alpha;
  return r;
}

DualityReport duality_experiment(const BilinearSystem& sys, const AtomicMeasure& mu, double scale, double t_minus,
                                 double t_plus, std::uint64_t seed, const IrgOptions& opts) {
  DualityReport r;
  r.scale = scale;
  r.t_minus = t_minus;
  r.t_plus = t_plus;
  r.t_g = gelation_time(sys, mu);
  if (!(r.t_g < t_minus && t_minus < t_plus)) {
    std::ostringstream os;
    os << "duality window needs t_g < t_minus < t_plus (t_g=" << r.t_g << ")";
    throw WindowInvalid(os.str());
  }
  const SurvivalCoefficients c = solve_c(sys, mu, t_minus);
  const AtomicMeasure tilted = tilted_measure(mu, c.c);
  r.dual_t_g = gelation_time(sys, tilted);
  if (!(t_plus < r.dual_t_g)) {
    std::ostringstream os;
    os << "t_plus=" << t_plus << " is not below the gelation time " << r.dual_t_g << " of the tilted measure";
    throw WindowInvalid(os.str());
  }
  r.gel_mass = gel_from_coefficients(mu, c.c).mass();

  Rng vrng(derive_seed(seed, 0));
  const GraphRealization g =
      sample_graph(sys, sample_poisson_types(mu, scale, vrng), scale, t_plus, derive_seed(seed, 1), opts);
  UnionFind uf(g.vertices.size());
  for (const Edge& e : g.edges) {
    if (e.t > t_minus) break;
    uf.unite(e.i, e.j);
  }
  const std::size_t giant = largest_root(uf);
  std::vector<char> alive(g.vertices.size(), 1);
  std::size_t survivors = g.vertices.size();
  if (giant < g.vertices.size()) {
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
      if (uf.find(v) == giant) {
        alive[v] = 0;
        --survivors;
      }
    }
  }
  r.surviving_fraction = static_cast<double>(survivors) / scale;
  const std::vector<double> dual_sizes = component_sizes(g, t_plus, &alive);

  Rng frng(derive_seed(seed, 2));
  const GraphRealization fresh =
      sample_graph(sys, sample_poisson_types(tilted, scale, frng), scale, t_plus, derive_seed(seed, 3), opts);
  const std::vector<double> fresh_sizes = component_sizes(fresh, t_plus, nullptr);

  auto max_of = [](const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); };
  r.dual_c1_over_n = max_of(dual_sizes) / scale;
  r.fresh_c1_over_n = max_of(fresh_sizes) / scale;
  if (!dual_sizes.empty() && !fresh_sizes.empty()) {
    const KsResult ks = ks_two_sample(dual_sizes, fresh_sizes);
    r.ks_sizes = ks.statistic;
    r.p_sizes = ks.p_value;
  }
  return r;
}

}  // namespace gelk
