#include "echoloc/embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "echoloc/error.hpp"
#include "echoloc/rng.hpp"

namespace echoloc {

Embedding eigenmap(const EigenBasis& basis, std::size_t m) {
  if (m < 1 || m + 1 > basis.size()) throw ValidationError("embedding dimension out of range");
  Embedding emb;
  emb.coords = basis.phi.middleCols(1, static_cast<Eigen::Index>(m));
  emb.zero_multiplicity = zero_multiplicity(basis);
  return emb;
}

Embedding eigenmap(const WeightedGraph& w, std::size_t m, LaplacianVariant variant, const EigenOptions& options) {
  if (m < 1 || m >= w.size()) throw ValidationError("embedding dimension must satisfy 1 <= m < n");
  if ((w.weights().array() == 0.0).all()) throw DisconnectedGraph("disconnected: affinity graph has no edges");
  if (variant != LaplacianVariant::unnormalized && w.has_isolated_vertex())
    throw DisconnectedGraph("disconnected: affinity graph has isolated vertices");
  return eigenmap(compute_basis(w, variant, m + 1, options), m);
}

namespace {

struct LloydRun {
  std::vector<int> assignment;
  Matrix centers;
  double inertia;
};

LloydRun lloyd(const Matrix& x, Eigen::Index k, Rng& rng, std::size_t max_iter) {
  const Eigen::Index n = x.rows();
  Matrix centers(k, x.cols());

  // k-means++ seeding.
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.row(0) = x.row(pick(rng));
  Vector closest = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (Eigen::Index c = 1; c < k; ++c) {
    const double total = closest.sum();
    Eigen::Index chosen = pick(rng);
    if (total > 0.0) {
      double r = uni(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        r -= closest(i);
        if (r <= 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centers.row(c) = x.row(chosen);
    closest = closest.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  double inertia = 0.0;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      const double d = (centers.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
      inertia += d;
      if (assign[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
        assign[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums = Matrix::Zero(k, x.cols());
    Vector counts = Vector::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
      counts(assign[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (Eigen::Index c = 0; c < k; ++c)
      if (counts(c) > 0) centers.row(c) = sums.row(c) / counts(c);
  }
  return {std::move(assign), std::move(centers), inertia};
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t restarts,
                    std::size_t max_iter) {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (k > static_cast<std::size_t>(points.rows())) throw ValidationError("k exceeds the number of points");
  const std::size_t runs = std::max<std::size_t>(1, restarts);
  std::vector<LloydRun> results(runs);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t r = 0; r < runs; ++r) {
    Rng rng(split_seed(seed, r));
    results[r] = lloyd(points, static_cast<Eigen::Index>(k), rng, max_iter);
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs; ++r)
    if (results[r].inertia < results[best].inertia) best = r;
  return {std::move(results[best].assignment), std::move(results[best].centers), results[best].inertia};
}

std::vector<std::size_t> hungarian(const Matrix& cost) {
  // Jonker-Volgenant style O(n^3) shortest augmenting path, 1-based internals.
  const auto n = static_cast<std::size_t>(cost.rows());
  if (cost.cols() != cost.rows()) throw ValidationError("hungarian needs a square cost matrix");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> col_of_row(n);
  for (std::size_t j = 1; j <= n; ++j) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

double matching_accuracy(std::span<const int> assignment, std::span<const int> labels) {
  if (assignment.size() != labels.size() || labels.empty())
    throw ValidationError("assignment and labels must be non-empty and equally long");
  std::map<int, std::size_t> cluster_ids, label_ids;
  for (int a : assignment) cluster_ids.emplace(a, cluster_ids.size());
  for (int l : labels) label_ids.emplace(l, label_ids.size());
  const auto k = static_cast<Eigen::Index>(std::max(cluster_ids.size(), label_ids.size()));
  Matrix agree = Matrix::Zero(k, k);
  for (std::size_t i = 0; i < labels.size(); ++i)
    agree(static_cast<Eigen::Index>(cluster_ids[assignment[i]]), static_cast<Eigen::Index>(label_ids[labels[i]])) += 1.0;
  const auto match = hungarian(-agree);
  double hits = 0.0;
  for (Eigen::Index r = 0; r < k; ++r) hits += agree(r, static_cast<Eigen::Index>(match[static_cast<std::size_t>(r)]));
  return hits / static_cast<double>(labels.size());
}

double clustering_accuracy(const Embedding& emb, std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (static_cast<std::size_t>(emb.coords.rows()) != labels.size())
    throw ValidationError("labels do not match the embedding");
  const KMeansResult km = kmeans(emb.coords, k, seed);
  return matching_accuracy(km.assignment, labels);
}

AffineFit affine_fit(const Vector& values, const Vector& target) {
  if (values.size() != target.size() || values.size() == 0)
    throw ValidationError("affine_fit needs equally long non-empty vectors");
  AffineFit fit;
  const double vm = values.mean();
  const double tm = target.mean();
  const Vector vc = values.array() - vm;
  const double var = vc.squaredNorm();
  // Relative test: values that are constant up to rounding get the constant fit.
  if (var <= 1e-24 * std::max(1.0, values.squaredNorm())) {
    fit.scale = 0.0;
  } else {
    fit.scale = vc.dot(target.array().matrix() - Vector::Constant(target.size(), tm)) / var;
  }
  fit.offset = tm - fit.scale * vm;
  fit.fitted = (fit.scale * values.array() + fit.offset).matrix();
  fit.rms = std::sqrt((fit.fitted - target).squaredNorm() / static_cast<double>(values.size()));
  return fit;
}

double step_fit_score(const Vector& values, const PointCloud& cloud) {
  if (cloud.targets.size() != static_cast<std::size_t>(values.size()))
    throw ValidationError("step_fit_score needs a dumbbell cloud with targets");
  const Vector target = Eigen::Map<const Vector>(cloud.targets.data(), static_cast<Eigen::Index>(cloud.targets.size()));
  return affine_fit(values, target).rms;
}

BoxVariance within_box_variance(const Vector& values, const PointCloud& cloud) {
  if (cloud.targets.size() != static_cast<std::size_t>(values.size()) || cloud.labels.size() != cloud.targets.size())
    throw ValidationError("within_box_variance needs a dumbbell cloud with labels and targets");
  const Vector target = Eigen::Map<const Vector>(cloud.targets.data(), static_cast<Eigen::Index>(cloud.targets.size()));
  const Vector fitted = affine_fit(values, target).fitted;
  double sum[2] = {0.0, 0.0}, sq[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < cloud.labels.size(); ++i) {
    if (cloud.labels[i] == 0) continue;
    const int b = cloud.labels[i] > 0 ? 1 : 0;
    sum[b] += fitted[static_cast<Eigen::Index>(i)];
    ++count[b];
  }
  if (count[0] == 0 || count[1] == 0) throw ValidationError("within_box_variance: empty box");
  for (std::size_t i = 0; i < cloud.labels.size(); ++i) {
    if (cloud.labels[i] == 0) continue;
    const int b = cloud.labels[i] > 0 ? 1 : 0;
    const double dev = fitted[static_cast<Eigen::Index>(i)] - sum[b] / static_cast<double>(count[b]);
    sq[b] += dev * dev;
  }
  return {sq[0] / static_cast<double>(count[0]), sq[1] / static_cast<double>(count[1])};
}

std::vector<std::size_t> circle_edge_counts(const WeightedGraph& graph,
                                            const std::vector<std::vector<std::size_t>>& circles,
                                            std::size_t limit) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < circles.size() && c < limit; ++c) {
    const auto& members = circles[c];
    std::size_t count = 0;
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        if (members[a] >= graph.size() || members[b] >= graph.size())
          throw ValidationError("circle member outside the graph");
        if (graph.weight(members[a], members[b]) != 0.0) ++count;
      }
    out.push_back(count);
  }
  return out;
}

}  // namespace echoloc
