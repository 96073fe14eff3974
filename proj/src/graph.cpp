#include "echoloc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "echoloc/error.hpp"
#include "echoloc/io.hpp"
#include "echoloc/rng.hpp"

namespace echoloc {

void PointCloud::validate() const {
  if (points.rows() < 2) throw ValidationError("point cloud needs at least 2 points");
  if (points.cols() < 1) throw ValidationError("point cloud dimension must be >= 1");
  if (!labels.empty() && labels.size() != size())
    throw ValidationError("label count does not match point count");
  if (!targets.empty() && targets.size() != size())
    throw ValidationError("target count does not match point count");
  if (!points.allFinite()) throw ValidationError("point cloud contains non-finite coordinates");
}

WeightedGraph::WeightedGraph(Matrix weights, bool allow_isolated) : w_(std::move(weights)) {
  if (w_.rows() != w_.cols()) throw ValidationError("weight matrix must be square");
  const Eigen::Index n = w_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w_(i, i) != 0.0) throw ValidationError("weight matrix must have zero diagonal");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double a = w_(i, j);
      if (!(a >= 0.0) || !std::isfinite(a))
        throw ValidationError("weights must be finite and non-negative");
      if (a != w_(j, i)) throw ValidationError("weight matrix must be exactly symmetric");
    }
  }
  if (!allow_isolated && has_isolated_vertex()) throw ValidationError("isolated vertex");
}

std::size_t WeightedGraph::edge_count() const {
  std::size_t count = 0;
  const Eigen::Index n = w_.rows();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i)
      if (w_(i, j) != 0.0) ++count;
  return count;
}

bool WeightedGraph::has_isolated_vertex() const {
  for (Eigen::Index i = 0; i < w_.rows(); ++i)
    if ((w_.row(i).array() == 0.0).all()) return true;
  return false;
}

void AffinityConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("epsilon must be > 0");
  if (truncation == Truncation::knn && k_nn < 1) throw ValidationError("k_nn must be >= 1");
  if (truncation == Truncation::radius && !(radius > 0.0))
    throw ValidationError("radius must be > 0");
}

AffinityConfig AffinityConfig::defaults_for(std::size_t n, double epsilon) {
  AffinityConfig cfg;
  cfg.epsilon = epsilon;
  if (n > 3000) {
    cfg.truncation = Truncation::knn;
    cfg.k_nn = 50;
  }
  return cfg;
}

LaplacianVariant parse_laplacian_variant(const std::string& name) {
  if (name == "unnorm" || name == "unnormalized") return LaplacianVariant::unnormalized;
  if (name == "sym" || name == "symmetric") return LaplacianVariant::symmetric;
  if (name == "rw" || name == "random_walk") return LaplacianVariant::random_walk;
  throw ValidationError("unknown laplacian variant '" + name + "'");
}

std::string to_string(LaplacianVariant v) {
  switch (v) {
    case LaplacianVariant::unnormalized: return "unnorm";
    case LaplacianVariant::symmetric: return "sym";
    case LaplacianVariant::random_walk: return "rw";
  }
  return "?";
}

namespace {

Matrix squared_distances(const Matrix& x) {
  const Eigen::Index n = x.rows();
  Matrix d2(n, n);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index j = 0; j < n; ++j) {
    d2(j, j) = 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = (x.row(i) - x.row(j)).squaredNorm();
      d2(i, j) = v;
    }
  }
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) d2(j, i) = d2(i, j);
  return d2;
}

}  // namespace

WeightedGraph build_affinity(const PointCloud& cloud, const AffinityConfig& config) {
  cloud.validate();
  config.validate();
  const Matrix d2 = squared_distances(cloud.points);
  const Eigen::Index n = d2.rows();

  // scalar exp: the vectorized one clamps its argument and never underflows to 0
  Matrix w = (-d2.array() / config.epsilon).unaryExpr([](double x) { return std::exp(x); }).matrix();
  w.diagonal().setZero();

  if (config.truncation == Truncation::radius) {
    const double r2 = config.radius * config.radius;
    w = (d2.array() <= r2).select(w, 0.0);
    w.diagonal().setZero();
  } else if (config.truncation == Truncation::knn) {
    const auto k = static_cast<Eigen::Index>(std::min<std::size_t>(config.k_nn, n - 1));
    // selected(i, j): i picked j among its k nearest.
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> selected =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::erase(order, i);
      std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                       [&](Eigen::Index a, Eigen::Index b) {
                         return d2(i, a) < d2(i, b) || (d2(i, a) == d2(i, b) && a < b);
                       });
      for (Eigen::Index t = 0; t < k; ++t) selected(i, order[static_cast<std::size_t>(t)]) = true;
      order.resize(static_cast<std::size_t>(n));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j + 1; i < n; ++i) {
        const bool keep = config.symmetrization == Symmetrization::max_rule
                              ? (selected(i, j) || selected(j, i))
                              : (selected(i, j) && selected(j, i));
        if (!keep) {
          w(i, j) = 0.0;
          w(j, i) = 0.0;
        }
      }
    }
  }
  return WeightedGraph(std::move(w), config.allow_isolated);
}

WeightedGraph add_noise_edges(const WeightedGraph& graph, std::span<const VertexPair> pairs,
                              double weight) {
  if (!(weight > 0.0)) throw ValidationError("noise edge weight must be > 0");
  Matrix w = graph.weights();
  const std::size_t n = graph.size();
  for (const auto& [u, v] : pairs) {
    if (u >= n || v >= n) throw std::out_of_range("noise edge references a non-existent vertex");
    if (u == v) continue;
    const auto a = static_cast<Eigen::Index>(u);
    const auto b = static_cast<Eigen::Index>(v);
    w(a, b) += weight;
    w(b, a) = w(a, b);
  }
  return WeightedGraph(std::move(w), true);
}

std::vector<VertexPair> sample_cross_pairs(std::span<const std::size_t> group_a,
                                           std::span<const std::size_t> group_b, double rate,
                                           std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ValidationError("cross rate must be in [0,1]");
  std::vector<VertexPair> out;
  if (rate == 0.0) return out;
  Rng rng(seed);
  std::bernoulli_distribution coin(rate);
  for (std::size_t a : group_a)
    for (std::size_t b : group_b)
      if (coin(rng)) out.emplace_back(a, b);
  return out;
}

Matrix laplacian(const WeightedGraph& graph, LaplacianVariant variant) {
  const Matrix& w = graph.weights();
  const Vector deg = graph.degrees();
  if (variant != LaplacianVariant::unnormalized && (deg.array() <= 0.0).any())
    throw ValidationError("zero degree");

  switch (variant) {
    case LaplacianVariant::unnormalized: {
      Matrix lap = -w;
      lap.diagonal() = deg;
      return lap;
    }
    case LaplacianVariant::symmetric: {
      const Vector s = deg.array().rsqrt();
      Matrix lap = -(s.asDiagonal() * w * s.asDiagonal());
      lap.diagonal().setOnes();
      // Enforce bitwise symmetry lost to rounding order.
      lap = (0.5 * (lap + lap.transpose())).eval();
      lap.diagonal().setOnes();
      return lap;
    }
    case LaplacianVariant::random_walk: {
      Matrix lap = -(deg.cwiseInverse().asDiagonal() * w);
      lap.diagonal().setOnes();
      return lap;
    }
  }
  return {};
}

SparseMatrix laplacian_sparse(const WeightedGraph& graph, LaplacianVariant variant) {
  const Matrix& w = graph.weights();
  const Vector deg = graph.degrees();
  if (variant != LaplacianVariant::unnormalized && (deg.array() <= 0.0).any())
    throw ValidationError("zero degree");
  const Eigen::Index n = w.rows();
  std::vector<Eigen::Triplet<double>> trips;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = w(i, j);
      if (i == j) {
        trips.emplace_back(i, i, variant == LaplacianVariant::unnormalized ? deg(i) : 1.0);
      } else if (a != 0.0) {
        double v = -a;
        if (variant == LaplacianVariant::symmetric) v = -a / std::sqrt(deg(i) * deg(j));
        if (variant == LaplacianVariant::random_walk) v = -a / deg(i);
        trips.emplace_back(i, j, v);
      }
    }
  }
  SparseMatrix lap(n, n);
  lap.setFromTriplets(trips.begin(), trips.end());
  return lap;
}

// ---- file formats --------------------------------------------------------

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

}  // namespace

PointCloud read_point_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty point file", 1);
  const auto header = split_csv(line);
  int label_col = -1;
  int target_col = -1;
  std::vector<int> coord_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "label") label_col = static_cast<int>(c);
    else if (header[c] == "target") target_col = static_cast<int>(c);
    else coord_cols.push_back(static_cast<int>(c));
  }
  if (coord_cols.empty()) throw ParseError("no coordinate columns in header", 1);

  std::vector<std::vector<double>> rows;
  PointCloud cloud;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw ParseError("wrong number of columns", lineno);
    std::vector<double> row;
    row.reserve(coord_cols.size());
    for (int c : coord_cols) row.push_back(parse_double(cells[static_cast<std::size_t>(c)], lineno));
    rows.push_back(std::move(row));
    if (label_col >= 0) {
      const double lv = parse_double(cells[static_cast<std::size_t>(label_col)], lineno);
      if (lv != std::floor(lv)) throw ParseError("label must be an integer", lineno);
      cloud.labels.push_back(static_cast<int>(lv));
    }
    if (target_col >= 0)
      cloud.targets.push_back(parse_double(cells[static_cast<std::size_t>(target_col)], lineno));
  }
  cloud.points.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(coord_cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < coord_cols.size(); ++c)
      cloud.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  cloud.validate();
  return cloud;
}

void write_point_csv(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.precision(17);
  for (std::size_t c = 0; c < cloud.dim(); ++c) out << (c ? "," : "") << 'x' << c;
  if (cloud.has_labels()) out << ",label";
  if (!cloud.targets.empty()) out << ",target";
  out << '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t c = 0; c < cloud.dim(); ++c)
      out << (c ? "," : "")
          << cloud.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    if (cloud.has_labels()) out << ',' << cloud.labels[i];
    if (!cloud.targets.empty()) out << ',' << cloud.targets[i];
    out << '\n';
  }
  if (!out) throw ValidationError("write failed for " + path.string());
}

WeightedGraph read_edge_list(const std::filesystem::path& path, std::size_t n_hint,
                             bool allow_isolated) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  struct Edge {
    std::size_t u, v;
    double w;
  };
  std::vector<Edge> edges;
  std::size_t n = n_hint;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() < 2 || tok.size() > 3) throw ParseError("expected 'u v [w]'", lineno);
    const double du = parse_double(tok[0], lineno);
    const double dv = parse_double(tok[1], lineno);
    if (du < 0 || dv < 0 || du != std::floor(du) || dv != std::floor(dv))
      throw ParseError("vertex ids must be non-negative integers", lineno);
    const double w = tok.size() == 3 ? parse_double(tok[2], lineno) : 1.0;
    if (!(w >= 0.0)) throw ParseError("edge weight must be non-negative", lineno);
    Edge e{static_cast<std::size_t>(du), static_cast<std::size_t>(dv), w};
    n = std::max({n, e.u + 1, e.v + 1});
    edges.push_back(e);
  }
  Matrix w = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& e : edges) {
    if (e.u == e.v) continue;
    const auto a = static_cast<Eigen::Index>(e.u);
    const auto b = static_cast<Eigen::Index>(e.v);
    // Repeated (or reversed) edges keep the larger weight.
    w(a, b) = std::max(w(a, b), e.w);
    w(b, a) = w(a, b);
  }
  return WeightedGraph(std::move(w), allow_isolated);
}

void write_edge_list(const std::filesystem::path& path, const WeightedGraph& graph) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.precision(17);
  const auto n = static_cast<Eigen::Index>(graph.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (graph.weights()(i, j) != 0.0) out << i << ' ' << j << ' ' << graph.weights()(i, j) << '\n';
}

}  // namespace echoloc
