#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "echoloc/graph.hpp"

namespace echoloc {

// ---- two disks with erroneous cross edges --------------------------------

struct TwoDisksParams {
  std::size_t n_per = 1000;
  double separation = 5.0;    // distance between disk centers; gap affinities are below 1e-50
  double cross_rate = 0.04;   // probability of each cross-cluster pair
  std::optional<double> epsilon;       // kernel bandwidth; default 10 / n_per (mean degree ~10)
  std::optional<double> cross_weight;  // default: median intra-cluster affinity
  std::uint64_t seed = 1;
};

struct TwoDisks {
  PointCloud cloud;      // labels 0 / 1
  WeightedGraph graph;   // affinity graph with injected cross edges
  double cross_weight = 0.0;
  std::size_t cross_edges = 0;
};

TwoDisks gen_two_disks(const TwoDisksParams& params);

double default_two_disks_epsilon(std::size_t n_per);

/// Median over the weights of each point's 10 nearest same-label neighbors.
double median_intra_affinity(const PointCloud& cloud, const WeightedGraph& graph, std::size_t k = 10);

// ---- dumbbell ------------------------------------------------------------

/// Left box [-1.5,-0.5] x [-0.5,0.5], right box [0.5,1.5] x [-0.5,0.5], neck
/// [-0.5,0.5] x [-w/2, w/2]. Labels -1 / 0 / +1; targets hold the piecewise
/// linear step f.
struct DumbbellParams {
  std::size_t n = 1500;
  double neck_width = 0.2;
  std::uint64_t seed = 1;
};

PointCloud gen_dumbbell(const DumbbellParams& params);

/// f(x) = -1 for x1 <= -0.5, 2 x1 in between, +1 for x1 >= 0.5.
double dumbbell_target(double x1);

// ---- spheres joined by a bridge ------------------------------------------

/// Unit spheres S^{dim_a} and S^{dim_b} embedded in R^{max(dim_a, dim_b) + 1},
/// centers on the first axis, joined by a segment (bridge_dim = 1) or flat
/// strip (bridge_dim = 2) between their nearest points. Labels 0 / 1 / 2.
struct SpheresBridgeParams {
  std::size_t dim_a = 6;
  std::size_t dim_b = 6;
  std::size_t n_a = 300;
  std::size_t n_b = 300;
  std::size_t n_bridge = 60;
  std::size_t bridge_dim = 1;
  double bridge_length = 1.0;
  double bridge_width = 0.3;  // strip width for bridge_dim = 2
  std::uint64_t seed = 1;
};

PointCloud gen_spheres_bridge(const SpheresBridgeParams& params);

// ---- plane with holes ----------------------------------------------------

struct Hole {
  double cx, cy, radius;
};

/// Uniform points in [0, side]^2 outside every hole (rejection sampling).
struct PlaneHolesParams {
  std::size_t n = 2000;
  double side = 1.0;
  std::vector<Hole> holes;
  std::uint64_t seed = 1;
};

PointCloud gen_plane_with_holes(const PlaneHolesParams& params);

/// Regular lattice of holes leaving thin bridges, used as the porous-medium
/// default.
std::vector<Hole> default_holes();

// ---- SNAP ego networks ---------------------------------------------------

struct SnapNetwork {
  WeightedGraph graph;                      // unit weights, compacted ids
  std::vector<std::vector<std::size_t>> circles;  // sorted by size, descending
  std::vector<std::string> circle_names;
  std::vector<std::int64_t> original_ids;   // compact id -> original id
};

/// Edge list of `u v` lines plus zero or more circle files with lines
/// `name<TAB>v1<TAB>v2...`. Circle members absent from the edge list are dropped.
SnapNetwork load_snap_circles(const std::filesystem::path& edge_file,
                              const std::vector<std::filesystem::path>& circle_files);

}  // namespace echoloc
