#include "echoloc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "echoloc/error.hpp"
#include "echoloc/rng.hpp"

namespace echoloc {

void EchoConfig::validate() const {
  if (n_eigs < 2) throw ValidationError("n_eigs must be >= 2");
  if (k_sources < 1) throw ValidationError("k_sources must be >= 1");
  if (samples < 2) throw ValidationError("samples must be >= 2");
  if (attenuation && !(*attenuation >= 0.0)) throw ValidationError("attenuation must be >= 0");
  if (horizon && !(*horizon > 0.0)) throw ValidationError("horizon must be > 0");
  norms.validate();
  Symbol::parse(symbol, 0.0);
}

std::vector<std::size_t> select_sources(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k > n) throw ValidationError("more sources requested than vertices");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

EchoResult run_echolocation(const WeightedGraph& graph, const EchoConfig& config) {
  config.validate();
  const std::size_t n_eigs = std::min(config.n_eigs, graph.size());
  return run_echolocation(graph, config, compute_basis(graph, config.variant, n_eigs, config.eigen));
}

EchoResult run_echolocation(const WeightedGraph& graph, const EchoConfig& config, EigenBasis basis) {
  config.validate();
  if (basis.vertices() != graph.size()) throw ValidationError("basis does not match graph");

  EchoResult out;
  out.lambda1 = spectral_gap(basis);
  out.attenuation = config.attenuation.value_or(1.0 / out.lambda1);
  out.horizon = config.horizon.value_or(config.full_period ? 2.0 * std::numbers::pi / out.lambda1
                                                           : 1.0 / out.lambda1);
  const Symbol symbol = Symbol::parse(config.symbol, out.attenuation);
  const TimeGrid grid(out.horizon, config.samples);
  out.sources = select_sources(graph.size(), config.k_sources, split_seed(config.seed, "sources"));

  DatumOptions datum_opts;
  datum_opts.zero_self_weight = config.zero_self_weight;
  PropagateOptions prop_opts;
  prop_opts.drop_constant_mode = config.drop_constant_mode;

  Synthesizer synth(config.rule);
  for (std::size_t v : out.sources) {
    const InitialDatum f = initial_datum(graph, v, datum_opts);
    const WaveField field = propagate(basis, f, symbol, grid, prop_opts);
    synth.add(per_source_distance(field, config.norms, grid));
  }
  out.distance = synth.result();
  out.basis = std::move(basis);
  return out;
}

Manifest EchoResult::manifest(const EchoConfig& config) const {
  Manifest m;
  m.set("laplacian", to_string(config.variant));
  m.set("n_eigs", basis.size());
  m.set("k_sources", config.k_sources);
  m.set("symbol", config.symbol);
  m.set("epsilon_atten", attenuation);
  m.set("horizon", horizon);
  m.set("full_period", config.full_period);
  m.set("samples", config.samples);
  m.set("norm_x", to_string(config.norms.x_norm));
  m.set("norm_y", config.norms.y_norm ? to_string(*config.norms.y_norm) : std::string("none"));
  m.set("alpha", config.norms.alpha);
  m.set("beta", config.norms.beta);
  m.set("rule", to_string(config.rule));
  m.set("seed", static_cast<unsigned long long>(config.seed));
  m.set("drop_constant_mode", config.drop_constant_mode);
  m.set("zero_self_weight", config.zero_self_weight);
  m.set("lambda1", lambda1);
  std::string list;
  for (std::size_t i = 0; i < sources.size(); ++i) list += (i ? "," : "") + std::to_string(sources[i]);
  m.set("sources", list);
  return m;
}

Embedding refined_embedding(const DistanceMatrix& d, std::size_t m, double epsilon_w, LaplacianVariant variant,
                            const EigenOptions& options) {
  Embedding emb = eigenmap(affinity_from_distance(d, epsilon_w).to_graph(), m, variant, options);
  emb.source = Embedding::Source::refined_metric;
  return emb;
}

}  // namespace echoloc
