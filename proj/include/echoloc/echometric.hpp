#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "echoloc/graph.hpp"
#include "echoloc/propagator.hpp"
#include "echoloc/spectrum.hpp"

namespace echoloc {

enum class TimeNorm { l1, l2 };

TimeNorm parse_time_norm(const std::string& name);
std::string to_string(TimeNorm norm);

/// d_i(v1, v2) = |u(., v1) - u(., v2)|_X^alpha + |u_t(., v1) - u_t(., v2)|_Y^beta.
/// beta == 0 or an absent y_norm drops the derivative term.
struct NormSpec {
  TimeNorm x_norm = TimeNorm::l1;
  std::optional<TimeNorm> y_norm = TimeNorm::l1;
  double alpha = 1.0;
  double beta = 1.0;

  void validate() const;
  bool uses_derivative() const { return y_norm.has_value() && beta > 0.0; }
};

enum class SynthesisRule { min, mean };

SynthesisRule parse_synthesis_rule(const std::string& name);
std::string to_string(SynthesisRule rule);

/// Symmetric, non-negative, zero diagonal.
struct DistanceMatrix {
  Matrix d;

  std::size_t size() const { return static_cast<std::size_t>(d.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  void validate() const;
};

/// Time norms use trapezoid weights on the grid; complex differences are
/// reduced by modulus before the norm.
DistanceMatrix per_source_distance(const WaveField& field, const NormSpec& norms, const TimeGrid& grid);

/// Entrywise min or mean of the per-source matrices.
DistanceMatrix synthesize(std::span<const DistanceMatrix> distances, SynthesisRule rule);

/// Streaming form of synthesize that keeps a single n x n buffer.
class Synthesizer {
 public:
  explicit Synthesizer(SynthesisRule rule) : rule_(rule) {}
  void add(const DistanceMatrix& d);
  std::size_t count() const { return count_; }
  DistanceMatrix result() const;

 private:
  SynthesisRule rule_;
  Matrix acc_;
  std::size_t count_ = 0;
};

/// d_N(x0, y0) = sqrt(sum_{k=1}^{N-1} (phi_k(x0) - phi_k(y0))^2), mode 0 excluded.
double spectral_distance(const EigenBasis& basis, std::size_t x0, std::size_t y0);

/// All-pairs spectral distance over modes 1..N-1.
DistanceMatrix spectral_distance_matrix(const EigenBasis& basis);

struct TheoremCheck {
  double time_average = 0.0;  // (1/T) int_0^T int_Omega (u_x0 - u_y0)^2 dx dt
  double target = 0.0;        // d_N(x0, y0)^2 / 2
  double ratio() const { return target > 0.0 ? time_average / target : 1.0; }
};

/// Time-averaged squared L2 distance between the undamped wave solutions
/// started from Dirac data at x0 and y0, mode 0 excluded, integrated with the
/// trapezoid rule over M samples of [0, T]. No connectivity requirement.
double time_averaged_distance(const EigenBasis& basis, std::size_t x0, std::size_t y0,
                              double horizon, std::size_t samples);

/// Requires a connected basis (spectral_gap succeeds). x0 == y0 gives (0, 0).
TheoremCheck verify_theorem(const EigenBasis& basis, std::size_t x0, std::size_t y0, double horizon,
                            std::size_t samples);

/// W = exp(-d^2 / epsilon_w); entries in (0, 1], unit diagonal.
struct AffinityFromDistance {
  double epsilon_w = 1.0;
  Matrix w;

  std::size_t size() const { return static_cast<std::size_t>(w.rows()); }
  /// Same affinities as a WeightedGraph (diagonal stripped, isolated allowed).
  WeightedGraph to_graph() const;
};

AffinityFromDistance affinity_from_distance(const DistanceMatrix& d, double epsilon_w = 1.0);

/// Edge {x, y} iff W(x, y) > factor * mean W over unordered off-diagonal pairs
/// (or over all ordered pairs including the diagonal when include_diagonal).
WeightedGraph threshold_graph(const AffinityFromDistance& w, double factor, bool include_diagonal = false);

/// Binary: n as int64 LE, then row-major doubles.
void save_matrix_binary(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix_binary(const std::filesystem::path& path);

}  // namespace echoloc
