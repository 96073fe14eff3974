// echoloc: command-line driver for dataset generation, echolocation runs,
// theorem checks, embeddings and raw-vs-refined comparisons.
//
// Exit codes: 0 success, 1 check failed, 2 invalid input, 3 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "echoloc/datasets.hpp"
#include "echoloc/echometric.hpp"
#include "echoloc/embed.hpp"
#include "echoloc/error.hpp"
#include "echoloc/graph.hpp"
#include "echoloc/io.hpp"
#include "echoloc/pipeline.hpp"
#include "echoloc/rng.hpp"
#include "echoloc/spectrum.hpp"

namespace fs = std::filesystem;
using namespace echoloc;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

void emit(const std::string& key, double value) {
  std::cout << key << '=' << std::setprecision(10) << value << '\n';
}
void emit(const std::string& key, const std::string& value) { std::cout << key << '=' << value << '\n'; }

fs::path prepare_out(const std::string& out) {
  const fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create output directory " + out);
  return dir;
}

// ---- graph input -----------------------------------------------------------

struct GraphInput {
  std::string points;
  std::string edges;
  double kernel_epsilon = 0.0;
  std::size_t knn = 0;
  double radius = 0.0;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--points", points, "point CSV (x0,x1,...[,label][,target])");
    cmd.add_option("--edges", edges, "edge list `u v [w]`; takes precedence over --points for the graph");
    cmd.add_option("--kernel-epsilon", kernel_epsilon, "Gaussian bandwidth when building from --points");
    cmd.add_option("--knn", knn, "kNN truncation (max rule); 0 uses the size-based default");
    cmd.add_option("--radius", radius, "radius truncation instead of kNN");
  }

  struct Loaded {
    std::optional<PointCloud> cloud;
    WeightedGraph graph;
  };

  Loaded load() const {
    Loaded out;
    if (points.empty() && edges.empty()) throw ValidationError("one of --points or --edges is required");
    if (!points.empty()) out.cloud = read_point_csv(points);
    if (!edges.empty()) {
      const std::size_t n_hint = out.cloud ? out.cloud->size() : 0;
      out.graph = read_edge_list(edges, n_hint);
      if (out.cloud && out.cloud->size() != out.graph.size())
        throw ValidationError("--points and --edges disagree on the vertex count");
      return out;
    }
    if (!(kernel_epsilon > 0.0)) throw ValidationError("--kernel-epsilon > 0 is required with --points");
    AffinityConfig cfg = AffinityConfig::defaults_for(out.cloud->size(), kernel_epsilon);
    if (radius > 0.0) {
      cfg.truncation = Truncation::radius;
      cfg.radius = radius;
    } else if (knn > 0) {
      cfg.truncation = Truncation::knn;
      cfg.k_nn = knn;
    }
    out.graph = build_affinity(*out.cloud, cfg);
    return out;
  }

  void record(Manifest& m) const {
    if (!points.empty()) {
      m.set("points", points);
      m.set("points_hash", hex64(hash_file(points)));
    }
    if (!edges.empty()) {
      m.set("edges", edges);
      m.set("edges_hash", hex64(hash_file(edges)));
    } else {
      m.set("kernel_epsilon", kernel_epsilon);
      m.set("knn", static_cast<unsigned long long>(knn));
      m.set("radius", radius);
    }
  }
};

// ---- echolocation parameters ------------------------------------------------

struct EchoOptions {
  std::string laplacian = "sym";
  std::string symbol = "wave";
  std::optional<double> attenuation;
  std::optional<double> horizon;
  bool full_period = false;
  std::size_t samples = 100;
  std::string norm_x = "l1";
  std::string norm_y = "l1";
  double alpha = 1.0;
  double beta = 1.0;
  std::string rule;
  std::size_t n_eigs = 50;
  std::size_t k_sources = 10;
  std::uint64_t seed = 1;
  bool drop_constant_mode = false;
  bool zero_self_weight = false;
  std::string eigen_method = "auto";
  std::string cache_dir;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--laplacian", laplacian, "unnorm | sym | rw")->check(CLI::IsMember({"unnorm", "sym", "rw"}));
    cmd.add_option("--symbol", symbol, "wave | heat | airy | schrodinger")
        ->check(CLI::IsMember({"wave", "heat", "airy", "schrodinger"}));
    cmd.add_option("--epsilon-atten", attenuation, "wave attenuation (default 1/lambda_1)");
    cmd.add_option("--horizon", horizon, "time horizon T (default 1/lambda_1)");
    cmd.add_flag("--full-period", full_period, "default horizon 2 pi / lambda_1");
    cmd.add_option("--samples", samples, "time samples M");
    cmd.add_option("--norm-x", norm_x, "l1 | l2")->check(CLI::IsMember({"l1", "l2"}));
    cmd.add_option("--norm-y", norm_y, "l1 | l2 | none")->check(CLI::IsMember({"l1", "l2", "none"}));
    cmd.add_option("--alpha", alpha);
    cmd.add_option("--beta", beta);
    cmd.add_option("--rule", rule, "min | mean (required)")->check(CLI::IsMember({"min", "mean"}));
    cmd.add_option("--n-eigs", n_eigs, "eigenpairs N");
    cmd.add_option("--k-sources", k_sources, "number of sources k");
    cmd.add_option("--seed", seed, "root seed");
    cmd.add_flag("--drop-constant-mode", drop_constant_mode);
    cmd.add_flag("--zero-self-weight", zero_self_weight);
    cmd.add_option("--eigen-method", eigen_method, "auto | dense | krylov")
        ->check(CLI::IsMember({"auto", "dense", "krylov"}));
    cmd.add_option("--cache-dir", cache_dir, "directory for cached eigenbases");
  }

  EchoConfig config() const {
    if (rule.empty()) throw ValidationError("--rule is required (min for continuous geometries, mean for clusters)");
    EchoConfig c;
    c.variant = parse_laplacian_variant(laplacian);
    c.symbol = symbol;
    c.attenuation = attenuation;
    c.horizon = horizon;
    c.full_period = full_period;
    c.samples = samples;
    c.norms.x_norm = parse_time_norm(norm_x);
    c.norms.y_norm = norm_y == "none" ? std::nullopt : std::optional<TimeNorm>(parse_time_norm(norm_y));
    c.norms.alpha = alpha;
    c.norms.beta = beta;
    c.rule = parse_synthesis_rule(rule);
    c.n_eigs = n_eigs;
    c.k_sources = k_sources;
    c.seed = seed;
    c.drop_constant_mode = drop_constant_mode;
    c.zero_self_weight = zero_self_weight;
    if (eigen_method == "dense") c.eigen.method = EigenMethod::dense;
    if (eigen_method == "krylov") c.eigen.method = EigenMethod::krylov;
    c.validate();
    return c;
  }

  EchoResult run(const WeightedGraph& graph, const EchoConfig& c) const {
    const std::size_t n_eigs = std::min(c.n_eigs, graph.size());
    EigenBasis basis = cache_dir.empty() ? compute_basis(graph, c.variant, n_eigs, c.eigen)
                                         : cached_basis(cache_dir, graph, c.variant, n_eigs, c.eigen);
    return run_echolocation(graph, c, std::move(basis));
  }
};

// Values from a key=value file fill options not given on the command line.
void apply_config(CLI::App& cmd, const std::string& path) {
  const Manifest file = Manifest::read(path);
  for (const auto& [raw_key, value] : file.entries()) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '_', '-');
    CLI::Option* opt = nullptr;
    try {
      opt = cmd.get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw ValidationError("config key '" + raw_key + "' is not an option of " + cmd.get_name());
    }
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

std::vector<int> labels_or_throw(const std::optional<PointCloud>& cloud) {
  if (!cloud || !cloud->has_labels()) throw ValidationError("ground truth needs --points with a label column");
  return cloud->labels;
}

std::size_t distinct(const std::vector<int>& labels) {
  return std::set<int>(labels.begin(), labels.end()).size();
}

// ---- generate --------------------------------------------------------------

struct GenerateCmd {
  std::string dataset;
  std::string out = "data";
  std::uint64_t seed = 1;
  std::size_t n_per = 1000;
  double separation = 5.0;
  double cross_rate = 0.04;
  std::optional<double> kernel_epsilon;
  std::optional<double> cross_weight;
  std::size_t n = 0;
  double neck_width = 0.2;
  std::size_t dim_a = 6, dim_b = 6, n_a = 300, n_b = 300, n_bridge = 60, bridge_dim = 1;

  void add_to(CLI::App& cmd) {
    cmd.add_option("dataset", dataset, "two-disks | dumbbell | spheres-bridge | plane-holes")
        ->required()
        ->check(CLI::IsMember({"two-disks", "dumbbell", "spheres-bridge", "plane-holes"}));
    cmd.add_option("--out", out, "output directory");
    cmd.add_option("--seed", seed);
    cmd.add_option("--n-per", n_per, "two-disks: points per disk");
    cmd.add_option("--separation", separation, "two-disks: center distance");
    cmd.add_option("--cross-rate", cross_rate, "two-disks: cross-edge probability");
    cmd.add_option("--kernel-epsilon", kernel_epsilon, "two-disks: kernel bandwidth (default 10/n_per)");
    cmd.add_option("--cross-weight", cross_weight, "two-disks: cross-edge weight");
    cmd.add_option("--n", n, "dumbbell / plane-holes: point count");
    cmd.add_option("--neck-width", neck_width, "dumbbell: neck height");
    cmd.add_option("--dim-a", dim_a);
    cmd.add_option("--dim-b", dim_b);
    cmd.add_option("--n-a", n_a);
    cmd.add_option("--n-b", n_b);
    cmd.add_option("--n-bridge", n_bridge);
    cmd.add_option("--bridge-dim", bridge_dim);
  }

  int run() const {
    const fs::path dir = prepare_out(out);
    Manifest m;
    m.set("command", "generate");
    m.set("dataset", dataset);
    m.set("seed", static_cast<unsigned long long>(seed));
    PointCloud cloud;
    if (dataset == "two-disks") {
      TwoDisksParams p;
      p.n_per = n_per;
      p.separation = separation;
      p.cross_rate = cross_rate;
      p.epsilon = kernel_epsilon;
      p.cross_weight = cross_weight;
      p.seed = seed;
      const TwoDisks d = gen_two_disks(p);
      cloud = d.cloud;
      write_edge_list(dir / "graph.edges", d.graph);
      m.set("n_per", static_cast<unsigned long long>(n_per));
      m.set("separation", separation);
      m.set("cross_rate", cross_rate);
      m.set("kernel_epsilon", kernel_epsilon.value_or(default_two_disks_epsilon(n_per)));
      m.set("cross_weight", d.cross_weight);
      m.set("cross_edges", static_cast<unsigned long long>(d.cross_edges));
      emit("cross_edges", static_cast<double>(d.cross_edges));
      emit("cross_weight", d.cross_weight);
    } else if (dataset == "dumbbell") {
      DumbbellParams p;
      if (n > 0) p.n = n;
      p.neck_width = neck_width;
      p.seed = seed;
      cloud = gen_dumbbell(p);
      m.set("n", static_cast<unsigned long long>(p.n));
      m.set("neck_width", neck_width);
    } else if (dataset == "spheres-bridge") {
      SpheresBridgeParams p;
      p.dim_a = dim_a;
      p.dim_b = dim_b;
      p.n_a = n_a;
      p.n_b = n_b;
      p.n_bridge = n_bridge;
      p.bridge_dim = bridge_dim;
      p.seed = seed;
      cloud = gen_spheres_bridge(p);
      m.set("dim_a", static_cast<unsigned long long>(dim_a));
      m.set("dim_b", static_cast<unsigned long long>(dim_b));
      m.set("n_a", static_cast<unsigned long long>(n_a));
      m.set("n_b", static_cast<unsigned long long>(n_b));
      m.set("n_bridge", static_cast<unsigned long long>(n_bridge));
      m.set("bridge_dim", static_cast<unsigned long long>(bridge_dim));
    } else {
      PlaneHolesParams p;
      if (n > 0) p.n = n;
      p.holes = default_holes();
      p.seed = seed;
      cloud = gen_plane_with_holes(p);
      m.set("n", static_cast<unsigned long long>(p.n));
      m.set("holes", static_cast<unsigned long long>(p.holes.size()));
    }
    write_point_csv(dir / "points.csv", cloud);
    m.set("points_hash", hex64(hash_file(dir / "points.csv")));
    m.write(dir / "manifest.txt");
    emit("points", static_cast<double>(cloud.size()));
    return 0;
  }
};

// ---- echo --------------------------------------------------------------------

struct EchoCmd {
  GraphInput input;
  EchoOptions echo;
  std::string out = "echo_out";
  double epsilon_w = 1.0;
  bool csv = false;

  void add_to(CLI::App& cmd) {
    input.add_to(cmd);
    echo.add_to(cmd);
    cmd.add_option("--out", out, "output directory");
    cmd.add_option("--epsilon-w", epsilon_w, "bandwidth of the exported affinity exp(-d^2/epsilon_w)");
    cmd.add_flag("--csv", csv, "also write CSV copies of the matrices");
  }

  int run() const {
    const EchoConfig config = echo.config();
    if (!(epsilon_w > 0.0)) throw ValidationError("--epsilon-w must be > 0");
    const auto loaded = input.load();
    const fs::path dir = prepare_out(out);
    const EchoResult r = echo.run(loaded.graph, config);
    const AffinityFromDistance w = affinity_from_distance(r.distance, epsilon_w);

    save_matrix_binary(dir / "distance.bin", r.distance.d);
    save_matrix_binary(dir / "affinity.bin", w.w);
    if (csv) {
      write_matrix_csv(dir / "distance.csv", r.distance.d, "v");
      write_matrix_csv(dir / "affinity.csv", w.w, "v");
    }
    {
      std::ofstream src(dir / "sources.txt");
      for (std::size_t v : r.sources) src << v << '\n';
      if (!src) throw ValidationError("cannot write sources.txt");
    }
    Manifest m;
    m.set("command", "echo");
    input.record(m);
    const Manifest run = r.manifest(config);
    for (const auto& [k, v] : run.entries()) m.set(k, v);
    m.set("eigen_method", echo.eigen_method);
    m.set("epsilon_w", epsilon_w);
    m.set("distance_hash", hex64(hash_file(dir / "distance.bin")));
    m.write(dir / "manifest.txt");

    emit("n", static_cast<double>(loaded.graph.size()));
    emit("lambda1", r.lambda1);
    emit("horizon", r.horizon);
    emit("epsilon_atten", r.attenuation);
    emit("distance_mean", r.distance.d.mean());
    return 0;
  }
};

// ---- verify-theorem ------------------------------------------------------------

struct VerifyCmd {
  GraphInput input;
  std::string laplacian = "sym";
  std::size_t n_eigs = 50;
  std::size_t pairs = 10;
  std::optional<std::size_t> x0, y0;
  double horizon_factor = 1000.0;
  std::size_t samples = 100000;
  double tolerance = 0.005;
  std::uint64_t seed = 1;

  void add_to(CLI::App& cmd) {
    input.add_to(cmd);
    cmd.add_option("--laplacian", laplacian)->check(CLI::IsMember({"unnorm", "sym", "rw"}));
    cmd.add_option("--n-eigs", n_eigs);
    cmd.add_option("--pairs", pairs, "number of random vertex pairs");
    cmd.add_option("--x0", x0, "explicit first vertex (with --y0)");
    cmd.add_option("--y0", y0, "explicit second vertex");
    cmd.add_option("--horizon-factor", horizon_factor, "T = factor / lambda_1");
    cmd.add_option("--samples", samples, "time samples M");
    cmd.add_option("--tolerance", tolerance, "allowed |ratio - 1|");
    cmd.add_option("--seed", seed);
  }

  std::vector<std::pair<std::size_t, std::size_t>> pick_pairs(std::size_t n) const {
    if (x0.has_value() != y0.has_value()) throw ValidationError("--x0 and --y0 go together");
    if (x0) {
      if (*x0 >= n || *y0 >= n) throw ValidationError("vertex out of range");
      return {{*x0, *y0}};
    }
    Rng rng(split_seed(seed, "pairs"));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < pairs; ++i) {
      const std::size_t a = pick(rng);
      out.emplace_back(a, pick(rng));
    }
    return out;
  }

  int run() const {
    if (!(tolerance >= 0.0) || !(horizon_factor > 0.0)) throw ValidationError("tolerance/horizon-factor out of range");
    const auto loaded = input.load();
    const std::size_t n = loaded.graph.size();
    const EigenBasis basis =
        compute_basis(loaded.graph, parse_laplacian_variant(laplacian), std::min(n_eigs, n));
    const auto selected = pick_pairs(n);

    const std::size_t zeros = zero_multiplicity(basis);
    if (zeros > 1) {
      // Two-sided bound report for a graph with several components.
      if (zeros >= basis.size()) throw NumericalError("no nonzero eigenvalue among the computed modes");
      const double horizon = horizon_factor / basis.lambda[static_cast<Eigen::Index>(zeros)];
      std::cout << "disconnected: zero eigenvalue multiplicity " << zeros << '\n';
      bool all_within = true;
      for (const auto& [a, b] : selected) {
        if (a == b) {
          std::cout << "pair=" << a << ',' << b << " trivial\n";
          continue;
        }
        const double avg = time_averaged_distance(basis, a, b, horizon, samples);
        const double d = spectral_distance(basis, a, b);
        const double lo = 0.5 * d * d, hi = d * d;
        const bool within = avg >= lo * (1.0 - tolerance) && avg <= hi * (1.0 + tolerance);
        all_within = all_within && within;
        std::cout << "pair=" << a << ',' << b << std::setprecision(10) << " time_average=" << avg
                  << " lower=" << lo << " upper=" << hi << " within_bound=" << (within ? "true" : "false")
                  << '\n';
      }
      emit("within_bound", all_within ? "true" : "false");
      return kExitNumerical;
    }

    const double horizon = horizon_factor / spectral_gap(basis);
    emit("horizon", horizon);
    double worst = 0.0;
    for (const auto& [a, b] : selected) {
      if (a == b) {
        std::cout << "pair=" << a << ',' << b << " trivial\n";
        continue;
      }
      const TheoremCheck c = verify_theorem(basis, a, b, horizon, samples);
      worst = std::max(worst, std::abs(c.ratio() - 1.0));
      std::cout << "pair=" << a << ',' << b << std::setprecision(10) << " time_average=" << c.time_average
                << " target=" << c.target << " ratio=" << c.ratio() << '\n';
    }
    emit("max_deviation", worst);
    return worst <= tolerance ? 0 : kExitCheckFailed;
  }
};

// ---- embed -------------------------------------------------------------------

void report_scores(const std::string& prefix, const Embedding& emb, const std::optional<PointCloud>& cloud,
                   std::uint64_t seed) {
  if (!cloud) return;
  if (!cloud->targets.empty()) {
    const Vector v = emb.coords.col(0);
    emit(prefix + "step_fit", step_fit_score(v, *cloud));
    const BoxVariance var = within_box_variance(v, *cloud);
    emit(prefix + "box_variance_left", var.left);
    emit(prefix + "box_variance_right", var.right);
  } else if (cloud->has_labels()) {
    emit(prefix + "accuracy",
         clustering_accuracy(emb, cloud->labels, distinct(cloud->labels), split_seed(seed, "kmeans")));
  }
}

struct EmbedCmd {
  GraphInput input;
  std::string distance;
  std::string laplacian = "sym";
  std::size_t dims = 1;
  double epsilon_w = 1.0;
  std::uint64_t seed = 1;
  std::string out = "embedding.csv";

  void add_to(CLI::App& cmd) {
    input.add_to(cmd);
    cmd.add_option("--distance", distance, "refined distance matrix (binary); omit for the raw eigenmap");
    cmd.add_option("--laplacian", laplacian)->check(CLI::IsMember({"unnorm", "sym", "rw"}));
    cmd.add_option("--dims", dims, "embedding dimension m");
    cmd.add_option("--epsilon-w", epsilon_w);
    cmd.add_option("--seed", seed);
    cmd.add_option("--out", out, "embedding CSV");
  }

  int run() const {
    const LaplacianVariant variant = parse_laplacian_variant(laplacian);
    std::optional<PointCloud> cloud;
    Embedding emb;
    if (!distance.empty()) {
      DistanceMatrix d;
      d.d = load_matrix_binary(distance);
      d.validate();
      if (!input.points.empty()) cloud = read_point_csv(input.points);
      emb = refined_embedding(d, dims, epsilon_w, variant);
    } else {
      const auto loaded = input.load();
      cloud = loaded.cloud;
      emb = eigenmap(loaded.graph, dims, variant);
    }
    write_matrix_csv(out, emb.coords, "e");
    emit("zero_multiplicity", static_cast<double>(emb.zero_multiplicity));
    if (emb.disconnected()) std::cerr << "warning: disconnected affinity graph\n";
    report_scores("", emb, cloud, seed);
    return 0;
  }
};

// ---- compare -------------------------------------------------------------------

struct CompareCmd {
  GraphInput input;
  EchoOptions echo;
  std::size_t dims = 1;
  double epsilon_w = 1.0;
  double factor = 10.0;
  bool include_diagonal = false;
  std::string snap_edges;
  std::vector<std::string> snap_circles;
  std::string out;

  void add_to(CLI::App& cmd) {
    input.add_to(cmd);
    echo.add_to(cmd);
    cmd.add_option("--dims", dims, "embedding dimension m");
    cmd.add_option("--epsilon-w", epsilon_w);
    cmd.add_option("--factor", factor, "threshold factor for circle graphs");
    cmd.add_flag("--include-diagonal", include_diagonal, "threshold mean includes the diagonal");
    cmd.add_option("--snap-edges", snap_edges, "SNAP edge list");
    cmd.add_option("--snap-circles", snap_circles, "SNAP circle files");
    cmd.add_option("--out", out, "directory for embeddings / counts");
  }

  int run_snap(const EchoConfig& config) const {
    std::vector<fs::path> files(snap_circles.begin(), snap_circles.end());
    const SnapNetwork net = load_snap_circles(snap_edges, files);
    emit("n", static_cast<double>(net.graph.size()));
    emit("circles", static_cast<double>(net.circles.size()));

    EchoConfig heat_config = config;
    heat_config.symbol = "heat";
    const EchoResult wave = echo.run(net.graph, config);
    const EchoResult heat = run_echolocation(net.graph, heat_config, wave.basis);

    const auto original = circle_edge_counts(net.graph, net.circles);
    const auto heat_counts =
        circle_edge_counts(threshold_graph(affinity_from_distance(heat.distance, epsilon_w), factor, include_diagonal),
                           net.circles);
    const auto wave_counts =
        circle_edge_counts(threshold_graph(affinity_from_distance(wave.distance, epsilon_w), factor, include_diagonal),
                           net.circles);
    auto median = [](std::vector<std::size_t> v) {
      if (v.empty()) return 0.0;
      std::sort(v.begin(), v.end());
      const std::size_t h = v.size() / 2;
      return v.size() % 2 ? static_cast<double>(v[h]) : 0.5 * static_cast<double>(v[h - 1] + v[h]);
    };
    std::cout << "circle,original,heat,wave\n";
    for (std::size_t c = 0; c < original.size(); ++c)
      std::cout << net.circle_names[c] << ',' << original[c] << ',' << heat_counts[c] << ',' << wave_counts[c]
                << '\n';
    emit("median_original", median(original));
    emit("median_heat", median(heat_counts));
    emit("median_wave", median(wave_counts));
    if (!out.empty()) {
      const fs::path dir = prepare_out(out);
      std::ofstream ids(dir / "ids.csv");
      ids << "compact,original\n";
      for (std::size_t i = 0; i < net.original_ids.size(); ++i) ids << i << ',' << net.original_ids[i] << '\n';
    }
    return 0;
  }

  int run() const {
    const EchoConfig config = echo.config();
    if (!snap_edges.empty()) return run_snap(config);

    const auto loaded = input.load();
    if (!loaded.cloud || (loaded.cloud->targets.empty() && !loaded.cloud->has_labels()))
      throw ValidationError("compare needs --points with labels or targets, or --snap-edges");
    const EchoResult r = echo.run(loaded.graph, config);
    const Embedding raw = eigenmap(r.basis, dims);
    const Embedding refined = refined_embedding(r.distance, dims, epsilon_w, config.variant);
    emit("lambda1", r.lambda1);
    report_scores("raw_", raw, loaded.cloud, config.seed);
    report_scores("refined_", refined, loaded.cloud, config.seed);
    if (!out.empty()) {
      const fs::path dir = prepare_out(out);
      write_matrix_csv(dir / "raw.csv", raw.coords, "e");
      write_matrix_csv(dir / "refined.csv", refined.coords, "e");
    }
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral echolocation on weighted graphs"};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "key=value file; command-line flags take precedence");

  GenerateCmd generate;
  EchoCmd echo;
  VerifyCmd verify;
  EmbedCmd embed;
  CompareCmd compare;
  CLI::App* generate_cmd = app.add_subcommand("generate", "write a synthetic dataset");
  CLI::App* echo_cmd = app.add_subcommand("echo", "compute the refined distance matrix");
  CLI::App* verify_cmd = app.add_subcommand("verify-theorem", "compare wave time averages with spectral distance");
  CLI::App* embed_cmd = app.add_subcommand("embed", "raw or refined eigenmap embedding");
  CLI::App* compare_cmd = app.add_subcommand("compare", "raw vs refined scores");
  generate.add_to(*generate_cmd);
  echo.add_to(*echo_cmd);
  verify.add_to(*verify_cmd);
  embed.add_to(*embed_cmd);
  compare.add_to(*compare_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    for (CLI::App* cmd : app.get_subcommands())
      if (!config_file.empty()) apply_config(*cmd, config_file);
    if (generate_cmd->parsed()) return generate.run();
    if (echo_cmd->parsed()) return echo.run();
    if (verify_cmd->parsed()) return verify.run();
    if (embed_cmd->parsed()) return embed.run();
    if (compare_cmd->parsed()) return compare.run();
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return 0;
}
