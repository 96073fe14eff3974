#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "echoloc/graph.hpp"
#include "echoloc/spectrum.hpp"

namespace echoloc {

struct Embedding {
  enum class Source { raw_eigenmap, refined_metric };

  Matrix coords;  // n x m
  Source source = Source::raw_eigenmap;
  /// Multiplicity of the zero eigenvalue; > 1 means the affinity graph was
  /// disconnected and the coordinates separate components.
  std::size_t zero_multiplicity = 1;

  bool disconnected() const { return zero_multiplicity > 1; }
};

/// First m nontrivial eigenvectors (phi_1 .. phi_m) as coordinates.
/// Throws DisconnectedGraph if the graph has no edges at all.
Embedding eigenmap(const WeightedGraph& w, std::size_t m, LaplacianVariant variant,
                   const EigenOptions& options = {});
Embedding eigenmap(const EigenBasis& basis, std::size_t m);

struct KMeansResult {
  std::vector<int> assignment;
  Matrix centers;
  double inertia = 0.0;
};

/// Lloyd iterations from k-means++ seeds; best of `restarts` runs, earliest
/// restart wins ties.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t restarts = 20,
                    std::size_t max_iter = 300);

/// Fraction of points whose cluster matches its label under the best
/// one-to-one cluster/label assignment.
double matching_accuracy(std::span<const int> assignment, std::span<const int> labels);

/// k-means on the coordinates followed by matching_accuracy.
double clustering_accuracy(const Embedding& emb, std::span<const int> labels, std::size_t k, std::uint64_t seed);

/// Minimum-cost assignment for a square cost matrix; returns column per row.
std::vector<std::size_t> hungarian(const Matrix& cost);

struct AffineFit {
  double scale = 0.0;
  double offset = 0.0;
  double rms = 0.0;
  Vector fitted;
};

/// Least-squares a, b minimizing |a v + b - target|; constant v degrades to
/// the best constant.
AffineFit affine_fit(const Vector& values, const Vector& target);

/// RMS deviation of the best affine map of `values` from the dumbbell targets.
double step_fit_score(const Vector& values, const PointCloud& cloud);

struct BoxVariance {
  double left = 0.0;
  double right = 0.0;
};

/// Variance of the affinely fitted values within each dumbbell box.
BoxVariance within_box_variance(const Vector& values, const PointCloud& cloud);

/// Induced edge count of each of the first `limit` circles.
std::vector<std::size_t> circle_edge_counts(const WeightedGraph& graph,
                                            const std::vector<std::vector<std::size_t>>& circles,
                                            std::size_t limit = 100);

}  // namespace echoloc
