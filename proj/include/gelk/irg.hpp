#pragma once

// Dynamic inhomogeneous random graph. The edge between vertices i and j
// arrives at N tau / Kbar(x_i, x_j) with tau ~ Exp(1), so clusters merge at
// the same rate as particles of the coagulant.

#include <cstdint>
#include <map>
#include <vector>

#include "gelk/core.hpp"

namespace gelk {

struct Edge {
  std::uint32_t i = 0;  // i < j
  std::uint32_t j = 0;
  double t = 0.0;
};

struct GraphRealization {
  std::vector<TypeVector> vertices;
  std::vector<Edge> edges;  // sorted by arrival time
  double scale = 1.0;
  double horizon = 0.0;
};

struct IrgOptions {
  std::size_t max_vertices = 30000;
};

/// Samples every edge with arrival time <= t_max. Vertices with identical
/// types are grouped so the cost is one geometric skip per included edge.
GraphRealization sample_graph(const BilinearSystem& sys, const std::vector<TypeVector>& vertices, double scale,
                              double t_max, std::uint64_t seed, const IrgOptions& opts = {});

struct ComponentCheckpoint {
  double t = 0.0;
  std::size_t c1 = 0;  // vertex count of the largest component
  double c1_over_n = 0.0;
  Vector pi_c1;        // pi(C_1) / N, length 1+n+m
  double meso_sum = 0.0;  // (1/N) sum of C_j over j >= 2 with C_j >= xi_N
  std::size_t n_components = 0;
  std::map<std::size_t, std::size_t> histogram;  // component size -> count
};

/// Inserts edges in arrival order and records the cluster statistics at
/// each checkpoint. The largest component is the strict maximum by size with
/// ties going to the smallest root index.
std::vector<ComponentCheckpoint> trajectory(const GraphRealization& graph, const std::vector<double>& checkpoints,
                                            double xi_n);

struct CouplingReport {
  double scale = 0.0;
  double t = 0.0;
  std::size_t replicas = 0;
  double alpha = 1e-3;
  double ks_phi = 0.0;
  double p_phi = 1.0;
  double ks_clusters = 0.0;
  double p_clusters = 1.0;
  bool pass = true;
  std::vector<double> graph_phi, particle_phi;
  std::vector<double> graph_clusters, particle_clusters;
};

/// Compares phi(largest cluster) / N and the number of clusters between
/// `replicas` graphs on `sys` and `replicas` coagulant runs on `particle_sys`
/// (the same system unless a deliberately mis-scaled control is wanted).
CouplingReport coupling_test(const BilinearSystem& sys, const BilinearSystem& particle_sys, const AtomicMeasure& mu,
                             double scale, double t, std::size_t replicas, std::uint64_t seed,
                             double alpha = 1e-3, unsigned threads = 0);

struct DualityReport {
  double scale = 0.0;
  double t_minus = 0.0;
  double t_plus = 0.0;
  double t_g = 0.0;
  double dual_t_g = 0.0;
  double gel_mass = 0.0;            // M at t_minus from the fixed point
  double surviving_fraction = 0.0;  // vertices outside the giant at t_minus, / N
  double dual_c1_over_n = 0.0;      // largest component left at t_plus
  double fresh_c1_over_n = 0.0;     // largest component of the fresh tilted graph
  double ks_sizes = 0.0;            // two-sample KS between component sizes
  double p_sizes = 1.0;
};

/// Deletes the giant component at t_minus, extends the rest to t_plus and
/// compares with a fresh graph on vertices drawn from the tilted measure.
/// Throws WindowInvalid unless t_g < t_minus < t_plus < t_g(tilted).
DualityReport duality_experiment(const BilinearSystem& sys, const AtomicMeasure& mu, double scale, double t_minus,
                                 double t_plus, std::uint64_t seed, const IrgOptions& opts = {});

}  // namespace gelk
