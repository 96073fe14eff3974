#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace echoloc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// n points in R^d stored row-wise, with optional integer labels and
/// optional real-valued per-point targets (used by the dumbbell data).
struct PointCloud {
  Matrix points;  // n x d
  std::vector<int> labels;
  std::vector<double> targets;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
  bool has_labels() const { return !labels.empty(); }

  /// Throws ValidationError unless n >= 2, d >= 1 and label/target sizes match.
  void validate() const;
};

/// Symmetric non-negative affinity matrix with zero diagonal.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  /// Validates symmetry, sign and zero diagonal. Isolated vertices are
  /// rejected unless allow_isolated is set.
  explicit WeightedGraph(Matrix weights, bool allow_isolated = false);

  std::size_t size() const { return static_cast<std::size_t>(w_.rows()); }
  const Matrix& weights() const { return w_; }
  double weight(std::size_t i, std::size_t j) const {
    return w_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  Vector degrees() const { return w_.rowwise().sum(); }
  std::size_t edge_count() const;
  bool has_isolated_vertex() const;

 private:
  Matrix w_;
};

enum class Truncation { none, knn, radius };

enum class Symmetrization {
  max_rule,  // keep an edge if either endpoint selects it
  min_rule,  // keep an edge only if both endpoints select it
};

struct AffinityConfig {
  double epsilon = 1.0;
  Truncation truncation = Truncation::none;
  std::size_t k_nn = 50;
  double radius = 0.0;
  Symmetrization symmetrization = Symmetrization::max_rule;
  bool allow_isolated = false;

  void validate() const;
  /// No truncation up to 3000 points, kNN with k = 50 above.
  static AffinityConfig defaults_for(std::size_t n, double epsilon);
};

enum class LaplacianVariant { unnormalized, symmetric, random_walk };

LaplacianVariant parse_laplacian_variant(const std::string& name);
std::string to_string(LaplacianVariant v);

/// Gaussian kernel exp(-|x_i - x_j|^2 / epsilon), truncated and symmetrized
/// per config, diagonal zeroed.
WeightedGraph build_affinity(const PointCloud& cloud, const AffinityConfig& config);

using VertexPair = std::pair<std::size_t, std::size_t>;

/// Adds `weight` at both (u,v) and (v,u) for every pair.
WeightedGraph add_noise_edges(const WeightedGraph& graph, std::span<const VertexPair> pairs,
                              double weight);

/// Each pair (a, b) with a in group_a, b in group_b is drawn independently
/// with probability `rate`.
std::vector<VertexPair> sample_cross_pairs(std::span<const std::size_t> group_a,
                                           std::span<const std::size_t> group_b, double rate,
                                           std::uint64_t seed);

/// Dense Laplacian. Symmetric for unnormalized/symmetric, general for random_walk.
Matrix laplacian(const WeightedGraph& graph, LaplacianVariant variant);
/// Sparse form of the same operator, built from nonzero weights only.
SparseMatrix laplacian_sparse(const WeightedGraph& graph, LaplacianVariant variant);

// ---- file formats --------------------------------------------------------

/// CSV with header `x0,x1,...[,label][,target]`.
PointCloud read_point_csv(const std::filesystem::path& path);
void write_point_csv(const std::filesystem::path& path, const PointCloud& cloud);

/// Whitespace-separated `u v [w]` lines with 0-based ids; `#` starts a comment.
/// Vertex count is max id + 1 unless n_hint is larger.
WeightedGraph read_edge_list(const std::filesystem::path& path, std::size_t n_hint = 0,
                             bool allow_isolated = false);
void write_edge_list(const std::filesystem::path& path, const WeightedGraph& graph);

}  // namespace echoloc
