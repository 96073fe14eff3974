#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "echoloc/echometric.hpp"
#include "echoloc/embed.hpp"
#include "echoloc/graph.hpp"
#include "echoloc/io.hpp"
#include "echoloc/propagator.hpp"
#include "echoloc/spectrum.hpp"

namespace echoloc {

/// Parameters of one echolocation run. Unset attenuation/horizon resolve to
/// 1/lambda_1 (horizon 2 pi / lambda_1 with full_period).
struct EchoConfig {
  LaplacianVariant variant = LaplacianVariant::symmetric;
  std::size_t n_eigs = 50;
  std::size_t k_sources = 10;
  std::string symbol = "wave";
  std::optional<double> attenuation;
  std::optional<double> horizon;
  bool full_period = false;
  std::size_t samples = 100;
  NormSpec norms;
  SynthesisRule rule = SynthesisRule::mean;
  std::uint64_t seed = 1;
  bool drop_constant_mode = false;
  bool zero_self_weight = false;
  EigenOptions eigen;

  void validate() const;
};

struct EchoResult {
  EigenBasis basis;
  double lambda1 = 0.0;
  double attenuation = 0.0;
  double horizon = 0.0;
  std::vector<std::size_t> sources;
  DistanceMatrix distance;

  /// Every resolved parameter, suitable for a run manifest.
  Manifest manifest(const EchoConfig& config) const;
};

/// k distinct vertices, uniform without replacement.
std::vector<std::size_t> select_sources(std::size_t n, std::size_t k, std::uint64_t seed);

/// Steps: basis, spectral gap, sources, mollified data, propagation,
/// per-source distances, synthesis.
EchoResult run_echolocation(const WeightedGraph& graph, const EchoConfig& config);
/// Same, reusing a basis already computed for `graph` under config.variant.
EchoResult run_echolocation(const WeightedGraph& graph, const EchoConfig& config, EigenBasis basis);

/// exp(-d^2 / epsilon_w) followed by an eigenmap of that affinity.
Embedding refined_embedding(const DistanceMatrix& d, std::size_t m, double epsilon_w = 1.0,
                            LaplacianVariant variant = LaplacianVariant::symmetric,
                            const EigenOptions& options = {});

}  // namespace echoloc
