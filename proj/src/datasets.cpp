#include "echoloc/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "echoloc/error.hpp"
#include "echoloc/rng.hpp"

namespace echoloc {

namespace {

void sample_unit_disk(Rng& rng, double cx, Eigen::Ref<Matrix> out) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    double x, y;
    do {
      x = uni(rng);
      y = uni(rng);
    } while (x * x + y * y > 1.0);
    out(i, 0) = cx + x;
    out(i, 1) = y;
  }
}

}  // namespace

double median_intra_affinity(const PointCloud& cloud, const WeightedGraph& graph, std::size_t k) {
  const std::size_t n = cloud.size();
  if (!cloud.has_labels()) throw ValidationError("median_intra_affinity needs labels");
  std::vector<double> picked;
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && cloud.labels[j] == cloud.labels[i]) row.push_back(graph.weight(i, j));
    const std::size_t take = std::min(k, row.size());
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(take), row.end(),
                      std::greater<>());
    picked.insert(picked.end(), row.begin(), row.begin() + static_cast<std::ptrdiff_t>(take));
  }
  if (picked.empty()) throw ValidationError("no intra-cluster pairs");
  const auto mid = picked.begin() + static_cast<std::ptrdiff_t>(picked.size() / 2);
  std::nth_element(picked.begin(), mid, picked.end());
  return *mid;
}

TwoDisks gen_two_disks(const TwoDisksParams& params) {
  if (params.n_per < 1) throw ValidationError("n_per must be >= 1");
  if (!(params.cross_rate >= 0.0 && params.cross_rate <= 1.0))
    throw ValidationError("cross_rate must be in [0,1]");
  const auto m = static_cast<Eigen::Index>(params.n_per);

  TwoDisks out;
  out.cloud.points.resize(2 * m, 2);
  Rng rng_a(split_seed(params.seed, "disk0"));
  Rng rng_b(split_seed(params.seed, "disk1"));
  sample_unit_disk(rng_a, 0.0, out.cloud.points.topRows(m));
  sample_unit_disk(rng_b, params.separation, out.cloud.points.bottomRows(m));
  out.cloud.labels.assign(2 * params.n_per, 0);
  std::fill(out.cloud.labels.begin() + m, out.cloud.labels.end(), 1);

  AffinityConfig cfg = AffinityConfig::defaults_for(
      2 * params.n_per, params.epsilon ? *params.epsilon : default_two_disks_epsilon(params.n_per));
  cfg.allow_isolated = true;
  const WeightedGraph base = build_affinity(out.cloud, cfg);

  out.cross_weight = params.cross_weight ? *params.cross_weight : median_intra_affinity(out.cloud, base);
  std::vector<std::size_t> a(params.n_per), b(params.n_per);
  std::iota(a.begin(), a.end(), std::size_t{0});
  std::iota(b.begin(), b.end(), params.n_per);
  const auto pairs = sample_cross_pairs(a, b, params.cross_rate, split_seed(params.seed, "cross"));
  out.cross_edges = pairs.size();
  out.graph = pairs.empty() ? base : add_noise_edges(base, pairs, out.cross_weight);
  return out;
}

double default_two_disks_epsilon(std::size_t n_per) { return 10.0 / static_cast<double>(n_per); }

double dumbbell_target(double x1) {
  if (x1 <= -0.5) return -1.0;
  if (x1 >= 0.5) return 1.0;
  return 2.0 * x1;
}

PointCloud gen_dumbbell(const DumbbellParams& params) {
  if (params.n < 2) throw ValidationError("dumbbell needs at least 2 points");
  if (!(params.neck_width > 0.0 && params.neck_width <= 1.0))
    throw ValidationError("neck width must be in (0, 1]");
  Rng rng(split_seed(params.seed, "dumbbell"));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double w = params.neck_width;
  const double total = 2.0 + w;

  PointCloud cloud;
  const auto n = static_cast<Eigen::Index>(params.n);
  cloud.points.resize(n, 2);
  cloud.labels.resize(params.n);
  cloud.targets.resize(params.n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pick = uni(rng) * total;
    double x, y;
    int label;
    if (pick < 1.0) {
      x = -1.5 + uni(rng);
      y = -0.5 + uni(rng);
      label = -1;
    } else if (pick < 2.0) {
      x = 0.5 + uni(rng);
      y = -0.5 + uni(rng);
      label = 1;
    } else {
      x = -0.5 + uni(rng);
      y = w * (uni(rng) - 0.5);
      label = 0;
    }
    cloud.points(i, 0) = x;
    cloud.points(i, 1) = y;
    cloud.labels[static_cast<std::size_t>(i)] = label;
    cloud.targets[static_cast<std::size_t>(i)] = dumbbell_target(x);
  }
  return cloud;
}

PointCloud gen_spheres_bridge(const SpheresBridgeParams& p) {
  if (p.dim_a < 1 || p.dim_b < 1) throw ValidationError("sphere dimensions must be >= 1");
  if (p.bridge_dim != 1 && p.bridge_dim != 2) throw ValidationError("bridge_dim must be 1 or 2");
  if (!(p.bridge_length > 0.0)) throw ValidationError("bridge length must be > 0");
  const auto ambient = static_cast<Eigen::Index>(std::max(p.dim_a, p.dim_b) + 1);
  const auto na = static_cast<Eigen::Index>(p.n_a);
  const auto nb = static_cast<Eigen::Index>(p.n_b);
  const auto nr = static_cast<Eigen::Index>(p.n_bridge);

  PointCloud cloud;
  cloud.points = Matrix::Zero(na + nb + nr, ambient);
  cloud.labels.reserve(static_cast<std::size_t>(na + nb + nr));

  const double offset_b = 2.0 + p.bridge_length;
  auto fill_sphere = [&](Eigen::Index start, Eigen::Index count, std::size_t dim, double center,
                         std::uint64_t seed, int label) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    const auto d = static_cast<Eigen::Index>(dim + 1);
    for (Eigen::Index i = 0; i < count; ++i) {
      Vector g(d);
      do {
        for (Eigen::Index c = 0; c < d; ++c) g(c) = normal(rng);
      } while (g.norm() < 1e-12);
      g.normalize();
      cloud.points.row(start + i).head(d) = g.transpose();
      cloud.points(start + i, 0) += center;
      cloud.labels.push_back(label);
    }
  };
  fill_sphere(0, na, p.dim_a, 0.0, split_seed(p.seed, "sphere_a"), 0);
  fill_sphere(na, nb, p.dim_b, offset_b, split_seed(p.seed, "sphere_b"), 1);

  Rng rng(split_seed(p.seed, "bridge"));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (Eigen::Index i = 0; i < nr; ++i) {
    const Eigen::Index row = na + nb + i;
    cloud.points(row, 0) = 1.0 + p.bridge_length * uni(rng);
    if (p.bridge_dim == 2) cloud.points(row, 1) = p.bridge_width * (uni(rng) - 0.5);
    cloud.labels.push_back(2);
  }
  return cloud;
}

std::vector<Hole> default_holes() {
  std::vector<Hole> holes;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) holes.push_back({(1.0 + 2.0 * i) / 6.0, (1.0 + 2.0 * j) / 6.0, 0.13});
  return holes;
}

PointCloud gen_plane_with_holes(const PlaneHolesParams& p) {
  if (p.n < 2) throw ValidationError("plane needs at least 2 points");
  if (!(p.side > 0.0)) throw ValidationError("plane side must be > 0");
  for (const auto& h : p.holes) {
    bool covers = true;
    for (double cx : {0.0, p.side})
      for (double cy : {0.0, p.side})
        covers = covers && std::hypot(cx - h.cx, cy - h.cy) < h.radius;
    if (covers) throw ValidationError("empty support: a hole covers the whole plane");
  }
  auto inside_hole = [&](double x, double y) {
    return std::any_of(p.holes.begin(), p.holes.end(),
                       [&](const Hole& h) { return std::hypot(x - h.cx, y - h.cy) < h.radius; });
  };

  Rng rng(split_seed(p.seed, "plane"));
  std::uniform_real_distribution<double> uni(0.0, p.side);
  PointCloud cloud;
  cloud.points.resize(static_cast<Eigen::Index>(p.n), 2);
  const std::size_t max_attempts = 10000 * p.n;
  std::size_t attempts = 0;
  for (Eigen::Index i = 0; i < cloud.points.rows(); ++i) {
    double x, y;
    do {
      if (++attempts > max_attempts) throw ValidationError("empty support: holes leave no room");
      x = uni(rng);
      y = uni(rng);
    } while (inside_hole(x, y));
    cloud.points(i, 0) = x;
    cloud.points(i, 1) = y;
  }
  return cloud;
}

namespace {

std::int64_t parse_id(const std::string& tok, std::size_t line) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(tok, &pos);
  } catch (const std::logic_error&) {
    throw ParseError("invalid vertex id '" + tok + "'", line);
  }
  if (pos != tok.size()) throw ParseError("invalid vertex id '" + tok + "'", line);
  return v;
}

}  // namespace

SnapNetwork load_snap_circles(const std::filesystem::path& edge_file,
                              const std::vector<std::filesystem::path>& circle_files) {
  std::ifstream in(edge_file);
  if (!in) throw ValidationError("cannot open " + edge_file.string());
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
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
    if (tok.size() != 2) throw ParseError("expected 'u v'", lineno);
    edges.emplace_back(parse_id(tok[0], lineno), parse_id(tok[1], lineno));
  }

  SnapNetwork net;
  for (const auto& [u, v] : edges) {
    net.original_ids.push_back(u);
    net.original_ids.push_back(v);
  }
  std::sort(net.original_ids.begin(), net.original_ids.end());
  net.original_ids.erase(std::unique(net.original_ids.begin(), net.original_ids.end()), net.original_ids.end());
  std::map<std::int64_t, std::size_t> compact;
  for (std::size_t i = 0; i < net.original_ids.size(); ++i) compact[net.original_ids[i]] = i;

  const auto n = static_cast<Eigen::Index>(net.original_ids.size());
  Matrix w = Matrix::Zero(n, n);
  for (const auto& [u, v] : edges) {
    if (u == v) continue;
    const auto a = static_cast<Eigen::Index>(compact[u]);
    const auto b = static_cast<Eigen::Index>(compact[v]);
    w(a, b) = 1.0;
    w(b, a) = 1.0;
  }
  net.graph = WeightedGraph(std::move(w), true);

  std::vector<std::pair<std::string, std::vector<std::size_t>>> circles;
  for (const auto& file : circle_files) {
    std::ifstream cin(file);
    if (!cin) throw ValidationError("cannot open " + file.string());
    lineno = 0;
    while (std::getline(cin, line)) {
      ++lineno;
      std::istringstream ss(line);
      std::string name;
      if (!(ss >> name)) continue;
      std::vector<std::size_t> members;
      for (std::string t; ss >> t;) {
        const auto it = compact.find(parse_id(t, lineno));
        if (it != compact.end()) members.push_back(it->second);
      }
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
      circles.emplace_back(file.stem().string() + ":" + name, std::move(members));
    }
  }
  std::stable_sort(circles.begin(), circles.end(),
                   [](const auto& a, const auto& b) { return a.second.size() > b.second.size(); });
  for (auto& [name, members] : circles) {
    net.circle_names.push_back(name);
    net.circles.push_back(std::move(members));
  }
  return net;
}

}  // namespace echoloc
